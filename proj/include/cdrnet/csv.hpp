#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdrnet/cdr.hpp"
#include "cdrnet/errors.hpp"

namespace cdrnet {

/// Maps logical variables to CSV headers and raw cell strings to ratings or
/// sentinels. Unmapped cells are load errors, never guesses.
struct ColumnMapping {
    std::map<std::string, std::string> columns;  // logical name -> CSV header
    // raw cell string -> level index, or the sentinels below
    std::map<std::string, int> values;  // >=0 level, RawCell::kInvalid, RawCell::kMissing
    char delimiter = ',';

    static ColumnMapping from_json(const nlohmann::json& j) {
        ColumnMapping m;
        for (const auto& [key, val] : j.at("columns").items())
            m.columns[key] = val.get<std::string>();
        for (const auto& [key, val] : j.at("values").items()) {
            if (val.is_string()) {
                const auto s = val.get<std::string>();
                if (s == "invalid") m.values[key] = RawCell::kInvalid;
                else if (s == "missing") m.values[key] = RawCell::kMissing;
                else m.values[key] = static_cast<int>(level_from_rating(std::stod(s)));
            } else {
                m.values[key] = static_cast<int>(level_from_rating(val.get<double>()));
            }
        }
        if (j.contains("delimiter")) m.delimiter = j.at("delimiter").get<std::string>().at(0);
        for (const auto& logical : kVarNames)
            if (!m.columns.count(logical))
                throw std::invalid_argument("column mapping missing analysis variable " + logical);
        return m;
    }

    static ColumnMapping from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw FileNotFound("mapping file not found: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }
};

struct LoadReport {
    std::size_t rows_read = 0;
    std::size_t cells_remapped = 0;
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delim)) fields.push_back(field);
    if (!line.empty() && line.back() == delim) fields.push_back("");
    return fields;
}

}  // namespace detail

/// Reads a delimited file into raw records, preserving sentinels for the
/// cleaner. Throws on structural problems and on cells absent from the value
/// dictionary.
inline std::pair<std::vector<RawRecord>, LoadReport> load_csv(const std::string& path,
                                                              const ColumnMapping& mapping) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("input file not found: " + path);

    std::string line;
    if (!std::getline(in, line)) throw MalformedCsv("empty file", 0);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto headers = detail::split_line(line, mapping.delimiter);

    std::map<std::string, std::size_t> header_index;
    for (std::size_t i = 0; i < headers.size(); ++i) header_index[headers[i]] = i;

    std::map<std::string, std::size_t> logical_index;  // logical name -> column position
    for (const auto& [logical, header] : mapping.columns) {
        auto it = header_index.find(header);
        if (it == header_index.end())
            throw MalformedCsv("mapped column \"" + header + "\" not in header", 1);
        logical_index[logical] = it->second;
    }

    LoadReport report;
    std::vector<RawRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_line(line, mapping.delimiter);
        if (fields.size() != headers.size())
            throw MalformedCsv("expected " + std::to_string(headers.size()) + " fields, got " +
                                   std::to_string(fields.size()),
                               line_no);
        ++report.rows_read;

        RawRecord rec;
        for (std::size_t v = 0; v < 7; ++v) {
            const std::string& logical = kVarNames[v];
            const std::string& cell = fields[logical_index.at(logical)];
            auto it = mapping.values.find(cell);
            if (it == mapping.values.end())
                throw UnmappedValue(mapping.columns.at(logical), cell, line_no);
            rec.cells[v].value = it->second;
            ++report.cells_remapped;
        }
        if (auto it = logical_index.find("subject_id"); it != logical_index.end())
            rec.subject_id = fields[it->second];
        if (auto it = logical_index.find("visit"); it != logical_index.end())
            rec.visit = fields[it->second];
        if (auto it = logical_index.find("rater_id"); it != logical_index.end()) {
            const std::string& cell = fields[it->second];
            if (!cell.empty()) {
                try {
                    rec.rater_id = std::stoi(cell);
                } catch (const std::exception&) {
                    throw MalformedCsv("rater id \"" + cell + "\" is not an integer", line_no);
                }
            }
        }
        records.push_back(std::move(rec));
    }
    return {std::move(records), report};
}

}  // namespace cdrnet
