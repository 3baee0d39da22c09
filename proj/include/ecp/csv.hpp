#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecp/grid.hpp"
#include "ecp/sample.hpp"

namespace ecp {

// Round-trip-exact double formatting; keeps CSV bodies byte-stable across
// reruns.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Raw sample CSV: one row per observation, d columns, header optional.
inline SampleMatrix read_sample_csv(const std::string& path, Scale scale = Scale::raw) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sample CSV: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::string cell;
        std::istringstream ls(line);
        bool numeric = true;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cell, &pos);
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos])))
                    ++pos;
                if (pos != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;  // header line
            }
            throw std::runtime_error("non-numeric row in sample CSV: " + path);
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged rows in sample CSV: " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty sample CSV: " + path);
    SampleMatrix s(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()), scale);
    for (int i = 0; i < s.n; ++i)
        for (int j = 0; j < s.d; ++j) s.at(i, j) = rows[i][j];
    if (scale == Scale::unit) s.validate_unit_values();
    return s;
}

inline void write_sample_csv(const std::string& path, const SampleMatrix& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sample CSV: " + path);
    for (int j = 0; j < s.d; ++j) out << (j ? "," : "") << "u" << (j + 1);
    out << '\n';
    for (int i = 0; i < s.n; ++i) {
        for (int j = 0; j < s.d; ++j) out << (j ? "," : "") << fmt_g17(s(i, j));
        out << '\n';
    }
}

// ProcessField CSV: one row per node, coordinates then value.
inline void write_field_csv(const std::string& path, const ProcessField& field) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write field CSV: " + path);
    const Grid& g = *field.grid;
    for (int j = 0; j < g.dim(); ++j) out << "u" << (j + 1) << ",";
    out << "value\n";
    std::vector<double> u(g.dim());
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.node(f, u);
        for (int j = 0; j < g.dim(); ++j) out << fmt_g17(u[j]) << ',';
        out << fmt_g17(field.values[f]) << '\n';
    }
}

}  // namespace ecp
