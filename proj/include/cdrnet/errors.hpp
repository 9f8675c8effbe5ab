#pragma once

#include <stdexcept>
#include <string>

namespace cdrnet {

struct CycleDetected : std::runtime_error {
    explicit CycleDetected(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownNode : std::out_of_range {
    explicit UnknownNode(const std::string& what) : std::out_of_range(what) {}
};

struct OverlappingArguments : std::invalid_argument {
    explicit OverlappingArguments(const std::string& what) : std::invalid_argument(what) {}
};

struct InvalidDof : std::invalid_argument {
    explicit InvalidDof(const std::string& what) : std::invalid_argument(what) {}
};

struct InsufficientVariables : std::invalid_argument {
    explicit InsufficientVariables(const std::string& what) : std::invalid_argument(what) {}
};

struct InconsistentSepSets : std::logic_error {
    explicit InconsistentSepSets(const std::string& what) : std::logic_error(what) {}
};

struct NoConsistentExtension : std::runtime_error {
    explicit NoConsistentExtension(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroProbabilityEvidence : std::runtime_error {
    explicit ZeroProbabilityEvidence(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidLevel : std::invalid_argument {
    explicit InvalidLevel(const std::string& what) : std::invalid_argument(what) {}
};

struct InvalidRating : std::invalid_argument {
    explicit InvalidRating(const std::string& what) : std::invalid_argument(what) {}
};

struct UnknownProfile : std::invalid_argument {
    explicit UnknownProfile(const std::string& what) : std::invalid_argument(what) {}
};

struct NodeSetMismatch : std::invalid_argument {
    explicit NodeSetMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct FileNotFound : std::runtime_error {
    explicit FileNotFound(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedCsv : std::runtime_error {
    MalformedCsv(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};

struct UnmappedValue : std::runtime_error {
    UnmappedValue(const std::string& column, const std::string& value, std::size_t line)
        : std::runtime_error("unmapped value \"" + value + "\" in column \"" + column +
                             "\" (line " + std::to_string(line) + ")"),
          column(column), value(value), line(line) {}
    std::string column;
    std::string value;
    std::size_t line;
};

}  // namespace cdrnet
