#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "cdrnet/cdr.hpp"

using namespace cdrnet;

namespace {

DomainScores scores(double m, double o, double jps, double ca, double hh, double pc) {
    return {level_from_rating(m), level_from_rating(o), level_from_rating(jps),
            level_from_rating(ca), level_from_rating(hh), level_from_rating(pc)};
}

double global_rating(const DomainScores& s) { return rating_from_level(global_cdr(s)); }

}  // namespace

// ---------------------------------------------------------------------------
// rating conversions
// ---------------------------------------------------------------------------

TEST_CASE("rating and level conversions round trip") {
    for (Level lvl = 0; lvl < kNumLevels; ++lvl)
        CHECK(level_from_rating(rating_from_level(lvl)) == lvl);
    CHECK(level_from_rating(0.5) == 1);
    CHECK(level_from_rating(3.0) == 4);
}

TEST_CASE("invalid ratings are rejected") {
    CHECK_THROWS_AS(level_from_rating(0.7), InvalidRating);
    CHECK_THROWS_AS(level_from_rating(-1.0), InvalidRating);
    CHECK_THROWS_AS(level_from_rating(4.0), InvalidRating);
    CHECK_THROWS_AS(rating_from_level(5), InvalidRating);
}

TEST_CASE("domain score validation catches out-of-range levels") {
    DomainScores s;
    s.pc = 7;
    CHECK_THROWS_AS(global_cdr(s), InvalidRating);
}

// ---------------------------------------------------------------------------
// global scoring rule
// ---------------------------------------------------------------------------

TEST_CASE("all-unimpaired scores to zero") {
    CHECK(global_rating(scores(0, 0, 0, 0, 0, 0)) == 0.0);
}

TEST_CASE("all-equal scores are fixed points") {
    for (double v : {0.0, 0.5, 1.0, 2.0, 3.0})
        CHECK(global_rating(scores(v, v, v, v, v, v)) == v);
}

TEST_CASE("mild memory with three impaired secondaries lifts to one") {
    CHECK(global_rating(scores(0.5, 1, 1, 1, 0.5, 0.5)) == 1.0);
}

TEST_CASE("mild memory otherwise stays at a half") {
    CHECK(global_rating(scores(0.5, 1, 1, 0, 0.5, 0)) == 0.5);
    CHECK(global_rating(scores(0.5, 0, 0, 0, 0, 0)) == 0.5);
}

TEST_CASE("intact memory with two touched secondaries lifts to a half") {
    CHECK(global_rating(scores(0, 1, 0.5, 0, 0, 0)) == 0.5);
    CHECK(global_rating(scores(0, 0.5, 0, 0, 0, 0)) == 0.0);
}

TEST_CASE("three or more secondaries at memory's value pin the global") {
    auto r = global_cdr_traced(scores(2, 2, 2, 2, 0, 0));
    CHECK(rating_from_level(r.global) == 2.0);
    CHECK(r.clause == GlobalCdrClause::majority_equal);
}

TEST_CASE("three on one side and two on the other returns memory") {
    auto r = global_cdr_traced(scores(1, 2, 2, 2, 0.5, 0));
    CHECK(rating_from_level(r.global) == 1.0);
    CHECK(r.clause == GlobalCdrClause::split_three_two);
}

TEST_CASE("a one-sided majority takes that side's modal value") {
    auto r = global_cdr_traced(scores(1, 2, 2, 2, 1, 1));
    CHECK(rating_from_level(r.global) == 2.0);
    CHECK(r.clause == GlobalCdrClause::majority_side);

    auto r2 = global_cdr_traced(scores(1, 2, 2, 2, 2, 0));
    CHECK(rating_from_level(r2.global) == 2.0);
    CHECK(r2.clause == GlobalCdrClause::majority_side);

    // bimodal side: three above M split 2-1, modal value wins
    auto r3 = global_cdr_traced(scores(1, 2, 2, 3, 1, 1));
    CHECK(rating_from_level(r3.global) == 2.0);
}

TEST_CASE("side-majority ties resolve toward memory") {
    // above M = 1: two at 2 and two at 3 is a 2-2 tie; 2 is closer to memory
    auto r = global_cdr_traced(scores(1, 2, 2, 3, 3, 1));
    CHECK(rating_from_level(r.global) == 2.0);
    CHECK(r.tie_break_used);
}

TEST_CASE("exhaustive sweep over every domain-score combination") {
    int count = 0;
    for (int m = 0; m < 5; ++m)
        for (int o = 0; o < 5; ++o)
            for (int j = 0; j < 5; ++j)
                for (int c = 0; c < 5; ++c)
                    for (int h = 0; h < 5; ++h)
                        for (int p = 0; p < 5; ++p) {
                            DomainScores s{static_cast<Level>(m), static_cast<Level>(o),
                                           static_cast<Level>(j), static_cast<Level>(c),
                                           static_cast<Level>(h), static_cast<Level>(p)};
                            const Level g = global_cdr(s);
                            REQUIRE(g < kNumLevels);
                            if (m == 0) REQUIRE(rating_from_level(g) <= 0.5);
                            if (rating_from_level(static_cast<Level>(m)) == 0.5) {
                                const double r = rating_from_level(g);
                                REQUIRE((r == 0.5 || r == 1.0));
                            }
                            ++count;
                        }
    CHECK(count == 15625);
}

// ---------------------------------------------------------------------------
// cleaning
// ---------------------------------------------------------------------------

namespace {

RawRecord valid_record(const std::string& subject, Level value = 1) {
    RawRecord r;
    for (auto& cell : r.cells) cell = RawCell::level(value);
    r.subject_id = subject;
    return r;
}

}  // namespace

TEST_CASE("clean_records keeps valid rows verbatim") {
    auto rec = valid_record("s1", 2);
    auto [d, report] = clean_records({rec});
    REQUIRE(d.n_rows() == 1);
    for (NodeId v = 0; v < 7; ++v) CHECK(d.at(0, v) == 2);
    CHECK(report.total == 1);
    CHECK(report.retained == 1);
}

TEST_CASE("clean_records counts each drop reason") {
    std::vector<RawRecord> raw;
    raw.push_back(valid_record("keep1"));
    raw.push_back(valid_record("keep2"));
    auto bad_sentinel = valid_record("s-inv");
    bad_sentinel.cells[CDR] = RawCell::invalid();
    raw.push_back(bad_sentinel);
    auto bad_missing = valid_record("s-nan");
    bad_missing.cells[CDR] = RawCell::missing();
    raw.push_back(bad_missing);
    auto bad_domain = valid_record("s-dom");
    bad_domain.cells[HH] = RawCell::missing();
    raw.push_back(bad_domain);

    auto [d, report] = clean_records(raw);
    CHECK(report.total == 5);
    CHECK(report.retained == 2);
    CHECK(report.invalid_sentinel == 1);
    CHECK(report.missing_global == 1);
    CHECK(report.missing_domain == 1);
    CHECK(report.non_first_rater == 0);
}

TEST_CASE("clean_records keeps only the lowest rater per subject and visit") {
    auto first = valid_record("subj", 1);
    first.visit = "v1";
    first.rater_id = 2;
    auto second = valid_record("subj", 3);
    second.visit = "v1";
    second.rater_id = 5;
    auto other_visit = valid_record("subj", 2);
    other_visit.visit = "v2";
    other_visit.rater_id = 9;

    auto [d, report] = clean_records({second, first, other_visit});
    CHECK(report.non_first_rater == 1);
    REQUIRE(d.n_rows() == 2);
    // the rater-2 record survives, not the rater-5 one
    std::set<std::uint8_t> globals{d.at(0, CDR), d.at(1, CDR)};
    CHECK(globals == std::set<std::uint8_t>{1, 2});
}

TEST_CASE("a drop reason is charged once per record in precedence order") {
    // later rater that is also invalid counts as non_first_rater only
    auto first = valid_record("s", 1);
    first.visit = "v";
    first.rater_id = 1;
    auto dup = valid_record("s", 1);
    dup.visit = "v";
    dup.rater_id = 2;
    dup.cells[CDR] = RawCell::invalid();
    auto [d, report] = clean_records({first, dup});
    CHECK(report.non_first_rater == 1);
    CHECK(report.invalid_sentinel == 0);
    CHECK(report.retained == 1);
}

// ---------------------------------------------------------------------------
// reference networks
// ---------------------------------------------------------------------------

TEST_CASE("unknown profiles are rejected") {
    CHECK_THROWS_AS(reference_profile("nacc-like"), UnknownProfile);
}

TEST_CASE("the dense reference network matches its published degrees") {
    auto bn = reference_network("adni-like");
    auto deg = node_degrees(bn.dag());
    CHECK(deg[CDR] == NodeDegree{6, 0});
    CHECK(deg[M] == NodeDegree{4, 1});
    CHECK(deg[O] == NodeDegree{0, 4});
    CHECK(deg[PC] == NodeDegree{0, 3});
}

TEST_CASE("the sparse reference network drops the expected edges") {
    auto dense = adni_reference_edges();
    auto sparse = lasi_reference_edges();
    auto bn = reference_network("lasi-like");
    CHECK(bn.dag().edges() == sparse);
    auto deg = node_degrees(bn.dag());
    CHECK(deg[CDR] == NodeDegree{6, 0});
    CHECK(deg[M] == NodeDegree{2, 1});
    // memory's two remaining parents
    CHECK(sparse.count({O, M}) == 1);
    CHECK(sparse.count({JPS, M}) == 1);
    // edges present only in the dense network
    for (Edge e : {Edge{CA, M}, Edge{HH, M}, Edge{CA, JPS}, Edge{O, CA}}) {
        CHECK(dense.count(e) == 1);
        CHECK(sparse.count(e) == 0);
    }
    // the judgement/community edge flips direction between the two
    CHECK(dense.count({CA, JPS}) == 1);
    CHECK(sparse.count({JPS, CA}) == 1);
}

TEST_CASE("reference marginals hit the pinned proportions in large samples") {
    struct Case {
        const char* name;
        const std::array<double, kNumLevels>* target;
    };
    for (const auto& c : {Case{"adni-like", &kAdniGlobalMarginals},
                          Case{"lasi-like", &kLasiGlobalMarginals}}) {
        auto prof = reference_profile(c.name);
        Dataset d = forward_sample(prof.network, 100000, 1000);
        std::array<double, kNumLevels> freq{};
        for (std::size_t r = 0; r < d.n_rows(); ++r) freq[d.at(r, CDR)] += 1.0 / 100000.0;
        for (int lvl = 0; lvl < kNumLevels; ++lvl) {
            INFO(c.name << " level " << kLevelLabels[static_cast<std::size_t>(lvl)]);
            CHECK(std::abs(freq[static_cast<std::size_t>(lvl)] -
                           (*c.target)[static_cast<std::size_t>(lvl)]) <= 0.02);
        }
    }
}

// ---------------------------------------------------------------------------
// cohort generation
// ---------------------------------------------------------------------------

TEST_CASE("generate_cohort produces at least one valid record") {
    auto prof = reference_profile("adni-like");
    Dataset d = generate_cohort(prof, 1, 42);
    REQUIRE(d.n_rows() == 1);
    for (NodeId v = 0; v < 7; ++v) CHECK(d.at(0, v) < kNumLevels);
    CHECK_THROWS_AS(generate_cohort(prof, 0, 42), std::invalid_argument);
}

TEST_CASE("generate_cohort is deterministic per seed") {
    auto prof = reference_profile("lasi-like");
    Dataset a = generate_cohort(prof, 500, 9);
    Dataset b = generate_cohort(prof, 500, 9);
    CHECK(a.rows() == b.rows());
}

TEST_CASE("rule-consistent cohorts satisfy the scoring rule everywhere") {
    auto prof = reference_profile("adni-like");
    Dataset d = generate_cohort(prof, 2000, 77, /*rule_consistent=*/true);
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        DomainScores s{d.at(r, M), d.at(r, O), d.at(r, JPS), d.at(r, CA), d.at(r, HH), d.at(r, PC)};
        REQUIRE(d.at(r, CDR) == global_cdr(s));
    }
}
