#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdrnet/errors.hpp"

namespace cdrnet {

using NodeId = int;

/// An ordinal categorical variable. Observations store level indices
/// 0..levels.size()-1; the labels are metadata.
struct VariableSpec {
    std::string name;
    std::vector<std::string> levels;

    std::size_t n_levels() const { return levels.size(); }
};

/// Fixed-width rows of level indices, one entry per variable.
class Dataset {
public:
    Dataset(std::vector<VariableSpec> variables, std::vector<std::vector<std::uint8_t>> rows)
        : variables_(std::move(variables)), rows_(std::move(rows)) {
        for (const auto& v : variables_) {
            if (v.levels.empty()) throw std::invalid_argument("variable " + v.name + " has no levels");
        }
        for (const auto& row : rows_) {
            if (row.size() != variables_.size())
                throw std::invalid_argument("row width does not match variable count");
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (row[j] >= variables_[j].n_levels())
                    throw std::invalid_argument("level index out of range for variable " +
                                                variables_[j].name);
            }
        }
    }

    const std::vector<VariableSpec>& variables() const { return variables_; }
    std::size_t n_vars() const { return variables_.size(); }
    std::size_t n_rows() const { return rows_.size(); }
    const std::vector<std::vector<std::uint8_t>>& rows() const { return rows_; }

    std::uint8_t at(std::size_t row, NodeId var) const { return rows_[row][static_cast<std::size_t>(var)]; }

    void check_node(NodeId id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= variables_.size())
            throw UnknownNode("unknown variable id " + std::to_string(id));
    }

private:
    std::vector<VariableSpec> variables_;
    std::vector<std::vector<std::uint8_t>> rows_;
};

}  // namespace cdrnet
