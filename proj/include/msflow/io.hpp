#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "msflow/common.hpp"

namespace msflow {

// Space-separated columnar text with a '#'-prefixed header line, every value
// in full-precision scientific notation.
inline void write_columns(const std::string& path,
                          const std::vector<std::string>& names,
                          const std::vector<Eigen::VectorXd>& columns) {
    if (names.size() != columns.size())
        throw IoError("column name/data count mismatch");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path);
    out << "#";
    for (const auto& n : names) out << " " << n;
    out << "\n";
    const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw IoError("column length mismatch in " + path);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (size_t c = 0; c < columns.size(); ++c)
            out << (c ? " " : "") << full_precision(columns[c][r]);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

inline void write_manifest(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open manifest: " + path);
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
    if (!out) throw IoError("write failed: " + path);
}

// key: value report lines
inline void write_report(const std::string& path,
                         const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open report: " + path);
    for (const auto& [k, v] : kv) out << k << ": " << v << "\n";
    if (!out) throw IoError("write failed: " + path);
}

} // namespace msflow
