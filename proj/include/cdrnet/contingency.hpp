#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "cdrnet/dataset.hpp"
#include "cdrnet/errors.hpp"

namespace cdrnet {

/// Cross-tabulated counts of (x, y) per observed conditioning configuration.
struct ContingencyTable {
    std::size_t x_levels = 0;
    std::size_t y_levels = 0;
    // stratum id -> row-major x_levels x y_levels counts
    std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>> strata;
    std::uint64_t total_n = 0;
};

struct CiTestResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool independent = true;
};

enum class CiMethod { chi2, g2 };

inline ContingencyTable build_table(const Dataset& d, NodeId x, NodeId y,
                                    const std::set<NodeId>& cond) {
    d.check_node(x);
    d.check_node(y);
    for (NodeId c : cond) d.check_node(c);
    if (x == y) throw OverlappingArguments("x and y must differ");
    if (cond.count(x) || cond.count(y))
        throw OverlappingArguments("conditioning set overlaps tested pair");

    ContingencyTable t;
    t.x_levels = d.variables()[static_cast<std::size_t>(x)].n_levels();
    t.y_levels = d.variables()[static_cast<std::size_t>(y)].n_levels();
    t.total_n = d.n_rows();

    const std::vector<NodeId> cvars(cond.begin(), cond.end());
    std::map<std::uint64_t, std::size_t> stratum_index;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        std::uint64_t key = 0;
        for (NodeId c : cvars)
            key = key * d.variables()[static_cast<std::size_t>(c)].n_levels() + d.at(r, c);
        auto [it, inserted] = stratum_index.try_emplace(key, t.strata.size());
        if (inserted)
            t.strata.emplace_back(key, std::vector<std::uint64_t>(t.x_levels * t.y_levels, 0));
        auto& counts = t.strata[it->second].second;
        counts[d.at(r, x) * t.y_levels + d.at(r, y)] += 1;
    }
    return t;
}

namespace detail {

// Shared statistic loop: chi-square and G2 differ only in the per-cell term.
template <typename CellTerm>
std::pair<double, int> table_statistic(const ContingencyTable& t, CellTerm cell_term) {
    double stat = 0.0;
    int dof = 0;
    std::vector<double> row_sum(t.x_levels), col_sum(t.y_levels);
    for (const auto& [key, counts] : t.strata) {
        std::fill(row_sum.begin(), row_sum.end(), 0.0);
        std::fill(col_sum.begin(), col_sum.end(), 0.0);
        double n = 0.0;
        for (std::size_t i = 0; i < t.x_levels; ++i)
            for (std::size_t j = 0; j < t.y_levels; ++j) {
                const double c = static_cast<double>(counts[i * t.y_levels + j]);
                row_sum[i] += c;
                col_sum[j] += c;
                n += c;
            }
        const int r_eff = static_cast<int>(std::count_if(row_sum.begin(), row_sum.end(),
                                                         [](double s) { return s > 0.0; }));
        const int c_eff = static_cast<int>(std::count_if(col_sum.begin(), col_sum.end(),
                                                         [](double s) { return s > 0.0; }));
        // a single observed row or column carries no independence information
        if (r_eff < 2 || c_eff < 2) continue;
        dof += (r_eff - 1) * (c_eff - 1);
        for (std::size_t i = 0; i < t.x_levels; ++i)
            for (std::size_t j = 0; j < t.y_levels; ++j) {
                const double expected = row_sum[i] * col_sum[j] / n;
                if (expected <= 0.0) continue;
                stat += cell_term(static_cast<double>(counts[i * t.y_levels + j]), expected);
            }
    }
    return {stat, dof};
}

}  // namespace detail

inline std::pair<double, int> chi_square_statistic(const ContingencyTable& t) {
    return detail::table_statistic(t, [](double obs, double exp) {
        const double diff = obs - exp;
        return diff * diff / exp;
    });
}

inline std::pair<double, int> g2_statistic(const ContingencyTable& t) {
    return detail::table_statistic(t, [](double obs, double exp) {
        return obs > 0.0 ? 2.0 * obs * std::log(obs / exp) : 0.0;
    });
}

namespace detail {

// Regularized incomplete gamma functions P(a,x) and Q(a,x), series and
// continued-fraction forms (Numerical Recipes style).
inline double gamma_p_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_contfrac(a, x);
}

}  // namespace detail

/// Upper-tail probability of the chi-square distribution,
/// Q(dof/2, statistic/2).
inline double chi_square_survival(double statistic, int dof) {
    if (dof < 1) throw InvalidDof("dof must be >= 1, got " + std::to_string(dof));
    if (statistic < 0.0) throw std::invalid_argument("statistic must be nonnegative");
    return detail::gamma_q(dof / 2.0, statistic / 2.0);
}

inline CiTestResult ci_test(const Dataset& d, NodeId x, NodeId y, const std::set<NodeId>& cond,
                            double alpha, CiMethod method = CiMethod::chi2) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    const auto table = build_table(d, x, y, cond);
    const auto [stat, dof] =
        method == CiMethod::chi2 ? chi_square_statistic(table) : g2_statistic(table);
    CiTestResult r;
    r.statistic = stat;
    r.dof = dof;
    if (dof == 0) {
        r.p_value = 1.0;
        r.independent = true;  // degenerate table
    } else {
        r.p_value = chi_square_survival(stat, dof);
        r.independent = r.p_value > alpha;
    }
    return r;
}

}  // namespace cdrnet
