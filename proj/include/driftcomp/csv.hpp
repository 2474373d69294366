#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace driftcomp {

// Minimal delimited-text helpers. All numbers are written with %.17g so
// files round-trip doubles exactly and byte-identical reruns diff clean.

namespace csv {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline void write_row(std::ostream& out, const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << fmt(row[i]);
    }
    out << '\n';
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv file '" + path + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv file '" + path + "'");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ',')) {
            char* end = nullptr;
            const double x = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw std::runtime_error("bad numeric cell '" + cell + "' in " + path);
            row.push_back(x);
        }
        if (row.size() != t.header.size())
            throw std::runtime_error("ragged csv row in " + path);
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace csv

}  // namespace driftcomp
