#pragma once

// Sample files: one point per line, D decimal naturals separated by single
// spaces. Lines starting with '#' are comments.

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "padic_core.hpp"

namespace padic_ml {

inline void write_points(std::ostream& out, std::span<const Point> points) {
    std::string line;
    for (const auto& x : points) {
        line.clear();
        for (std::size_t d = 0; d < x.size(); ++d) {
            if (d != 0) line += ' ';
            line += std::to_string(x[d]);
        }
        line += '\n';
        out << line;
    }
}

inline std::vector<Point> read_points(std::istream& in, std::size_t dimension) {
    std::vector<Point> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<Coordinate> coords;
        std::size_t pos = 0;
        while (true) {
            const std::size_t end = line.find(' ', pos);
            const std::string token = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
            if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos ||
                token.size() > 19) {
                throw std::runtime_error("sample line " + std::to_string(line_no) +
                                         ": malformed coordinate '" + token + "' in '" + line + "'");
            }
            coords.push_back(std::stoull(token));
            if (end == std::string::npos) break;
            pos = end + 1;
        }
        if (coords.size() != dimension) {
            throw std::runtime_error("sample line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(dimension) + " coordinates, found " +
                                     std::to_string(coords.size()));
        }
        points.emplace_back(std::move(coords));
    }
    return points;
}

}  // namespace padic_ml
