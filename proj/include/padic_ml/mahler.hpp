#pragma once

/**
 * @file mahler.hpp
 * @brief Multidimensional Mahler transform mod p^E on a cubic grid N_{<n}^D.
 *
 * The D-dimensional Mahler basis is the product of C(x_d, l_d) over axes, so
 * the transform factors into 1-d transforms along each axis. A 1-d transform
 * of the values f(0..n-1) replaces them by iterated forward differences,
 *
 *     c_i = sum_{j<=i} (-1)^{i-j} C(i,j) f(j),
 *
 * and evaluation sums c_l * prod_d C(x_d, l_d).
 *
 * Grids are stored row-major: axis 0 varies slowest.
 */

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "padic_core.hpp"

namespace padic_ml {

/// A D-dimensional array of residues over N_{<extent}^D.
class ResidueGrid {
public:
    ResidueGrid(std::size_t dimension, std::size_t extent, std::uint64_t modulus)
        : dimension_(dimension), extent_(extent), ring_(modulus) {
        if (extent < 1) throw std::invalid_argument("grid extent must be at least 1");
        const std::uint64_t cells = checked_pow(extent, dimension, max_grid_cells);
        if (cells == 0) {
            throw std::length_error("grid of extent " + std::to_string(extent) + " in dimension " +
                                    std::to_string(dimension) + " exceeds capacity");
        }
        data_.assign(static_cast<std::size_t>(cells), 0);
    }

    ResidueGrid(std::size_t dimension, std::size_t extent, std::uint64_t modulus,
                std::vector<Residue> data)
        : ResidueGrid(dimension, extent, modulus) {
        if (data.size() != data_.size()) {
            throw std::invalid_argument("grid data has " + std::to_string(data.size()) +
                                        " entries, expected " + std::to_string(data_.size()));
        }
        for (const auto r : data) {
            if (r >= modulus) throw std::invalid_argument("grid entry not reduced mod p^E");
        }
        data_ = std::move(data);
    }

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t extent() const noexcept { return extent_; }
    std::uint64_t modulus() const noexcept { return ring_.modulus(); }
    const ResidueRing& ring() const noexcept { return ring_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const Residue> data() const noexcept { return data_; }
    std::span<Residue> data() noexcept { return data_; }

    Residue operator[](std::size_t flat) const noexcept { return data_[flat]; }
    Residue& operator[](std::size_t flat) noexcept { return data_[flat]; }

    /// Distance in the flat array between neighbours along `axis`.
    std::size_t stride(std::size_t axis) const noexcept {
        std::size_t s = 1;
        for (std::size_t d = axis + 1; d < dimension_; ++d) s *= extent_;
        return s;
    }

    std::size_t flat_index(std::span<const std::size_t> index) const {
        if (index.size() != dimension_) throw std::invalid_argument("multi-index dimension mismatch");
        std::size_t flat = 0;
        for (const auto i : index) {
            if (i >= extent_) throw std::out_of_range("multi-index outside grid extent");
            flat = flat * extent_ + i;
        }
        return flat;
    }

    std::vector<std::size_t> multi_index(std::size_t flat) const {
        std::vector<std::size_t> index(dimension_);
        for (std::size_t d = dimension_; d-- > 0;) {
            index[d] = flat % extent_;
            flat /= extent_;
        }
        return index;
    }

    Residue at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

    /// Value at a point of the grid.
    Residue at(const Point& x) const {
        require_dimension(x, dimension_);
        std::size_t flat = 0;
        for (const auto c : x) {
            if (c >= extent_) throw std::out_of_range("point " + to_string(x) + " outside grid");
            flat = flat * extent_ + static_cast<std::size_t>(c);
        }
        return data_[flat];
    }

    friend bool operator==(const ResidueGrid& a, const ResidueGrid& b) {
        return a.dimension_ == b.dimension_ && a.extent_ == b.extent_ &&
               a.modulus() == b.modulus() && a.data_ == b.data_;
    }

private:
    std::size_t dimension_;
    std::size_t extent_;
    ResidueRing ring_;
    std::vector<Residue> data_;
};

/// Mahler coefficients c_l for multi-indices l in N_{<extent}^D.
class MahlerCoefficients {
public:
    explicit MahlerCoefficients(ResidueGrid grid) : grid_(std::move(grid)) {}

    const ResidueGrid& grid() const noexcept { return grid_; }
    ResidueGrid& grid() noexcept { return grid_; }

    std::size_t dimension() const noexcept { return grid_.dimension(); }
    std::size_t extent() const noexcept { return grid_.extent(); }

    friend bool operator==(const MahlerCoefficients&, const MahlerCoefficients&) = default;

private:
    ResidueGrid grid_;
};

/// In place: replace every line along `axis` by its iterated forward differences.
inline void difference_axis(ResidueGrid& grid, std::size_t axis) {
    if (axis >= grid.dimension()) throw std::invalid_argument("axis out of range");
    const std::size_t n = grid.extent();
    const std::size_t stride = grid.stride(axis);
    const std::size_t block = stride * n;
    const ResidueRing& ring = grid.ring();
    auto data = grid.data();
    // Lines along `axis` start at (outer * block + inner) for inner < stride.
    // Sweeping all inner offsets together keeps memory access contiguous.
    for (std::size_t outer = 0; outer < data.size(); outer += block) {
        Residue* base = data.data() + outer;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            for (std::size_t x = n - 1; x > k; --x) {
                Residue* hi = base + x * stride;
                const Residue* lo = base + (x - 1) * stride;
                for (std::size_t j = 0; j < stride; ++j) hi[j] = ring.sub(hi[j], lo[j]);
            }
        }
    }
}

/// Separable D-dimensional Mahler transform: one difference pass per axis.
inline MahlerCoefficients forward_transform(ResidueGrid grid) {
    for (std::size_t axis = 0; axis < grid.dimension(); ++axis) difference_axis(grid, axis);
    return MahlerCoefficients(std::move(grid));
}

/// Mahler coefficients of a 1-d sequence straight from the alternating
/// binomial sum, without going through differences.
inline std::vector<Residue> coeffs_1d_oracle(std::span<const Residue> values, std::uint64_t modulus) {
    if (values.empty()) throw std::invalid_argument("coeffs_1d_oracle needs at least one value");
    const ResidueRing ring(modulus);
    const std::size_t n = values.size();
    const BinomialTable table(modulus, n - 1, n - 1);
    std::vector<Residue> coeffs(n);
    for (std::size_t i = 0; i < n; ++i) {
        Residue sum = 0;
        for (std::size_t j = 0; j <= i; ++j) {
            const Residue term = ring.mul(table(i, j), ring.reduce(values[j]));
            sum = ((i - j) % 2 == 0) ? ring.add(sum, term) : ring.sub(sum, term);
        }
        coeffs[i] = sum;
    }
    return coeffs;
}

/**
 * Fix the axis-0 argument: returns the (D-1)-dimensional grid
 *
 *     g[l_1..l_{D-1}] = sum_{l_0} C(x0, l_0) * c[l_0, l_1..l_{D-1}]  mod p^E.
 *
 * A 1-dimensional input yields a 0-dimensional grid holding the value.
 */
inline ResidueGrid contract_leading(const ResidueGrid& coeffs, Coordinate x0,
                                    const BinomialTable& table) {
    if (coeffs.dimension() == 0) throw std::invalid_argument("cannot contract a 0-dimensional grid");
    if (table.modulus() != coeffs.modulus()) {
        throw std::invalid_argument("binomial table modulus differs from coefficient modulus");
    }
    const std::size_t n = coeffs.extent();
    if (!table.covers(x0, n - 1)) {
        throw std::out_of_range("binomial table does not cover C(" + std::to_string(x0) + ", " +
                                std::to_string(n - 1) + ")");
    }
    ResidueGrid out(coeffs.dimension() - 1, n, coeffs.modulus());
    const std::size_t inner = out.size();
    const std::uint64_t q = coeffs.modulus();
    const std::uint64_t square = (q - 1) * (q - 1);
    const std::uint64_t ceiling = ~std::uint64_t{0} - square;

    std::vector<std::uint64_t> acc(inner, 0);
    std::uint64_t bound = 0;  // upper bound on every accumulator
    const auto weights = table.row(x0);
    const auto src = coeffs.data();
    // C(x0, l) vanishes for l > x0.
    const std::size_t terms = std::min<std::uint64_t>(n, x0 + 1);
    for (std::size_t l = 0; l < terms; ++l) {
        const std::uint64_t w = weights[l];
        if (w == 0) continue;
        if (bound > ceiling) {
            for (auto& a : acc) a %= q;
            bound = q - 1;
        }
        const Residue* line = src.data() + l * inner;
        for (std::size_t j = 0; j < inner; ++j) acc[j] += w * line[j];
        bound += square;
    }
    auto dst = out.data();
    for (std::size_t j = 0; j < inner; ++j) dst[j] = static_cast<Residue>(acc[j] % q);
    return out;
}

/// sum_l C(x, l) * coeffs[l] mod p^E for a 1-d coefficient line.
inline Residue evaluate_line(std::span<const Residue> coeffs, Coordinate x, const BinomialTable& table) {
    if (coeffs.empty()) return 0;
    if (!table.covers(x, coeffs.size() - 1)) {
        throw std::out_of_range("binomial table does not cover C(" + std::to_string(x) + ", " +
                                std::to_string(coeffs.size() - 1) + ")");
    }
    const std::uint64_t q = table.modulus();
    const std::uint64_t square = (q - 1) * (q - 1);
    const std::uint64_t ceiling = ~std::uint64_t{0} - square;
    const auto weights = table.row(x);
    const std::size_t terms = std::min<std::uint64_t>(coeffs.size(), x + 1);
    std::uint64_t acc = 0;
    for (std::size_t l = 0; l < terms; ++l) {
        if (acc > ceiling) acc %= q;
        acc += std::uint64_t{weights[l]} * coeffs[l];
    }
    return static_cast<Residue>(acc % q);
}

/// sum over l of c_l * prod_d C(x_d, l_d) mod p^E.
inline Residue evaluate(const MahlerCoefficients& coeffs, const Point& x, const BinomialTable& table) {
    require_dimension(x, coeffs.dimension());
    if (coeffs.dimension() == 0) return coeffs.grid()[0];
    ResidueGrid current = contract_leading(coeffs.grid(), x[0], table);
    for (std::size_t d = 1; d < x.size(); ++d) current = contract_leading(current, x[d], table);
    return current[0];
}

/// Zero every coefficient whose multi-index has a component >= truncation.
inline void truncate(MahlerCoefficients& coeffs, std::size_t truncation) {
    auto& grid = coeffs.grid();
    if (truncation >= grid.extent()) return;
    const std::size_t n = grid.extent();
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t d = 0; d < grid.dimension(); ++d, rest /= n) {
            if (rest % n >= truncation) {
                grid[flat] = 0;
                break;
            }
        }
    }
}

/// Header fields of a coefficient dump.
struct CoefficientDumpHeader {
    std::uint32_t prime = 0;
    std::uint32_t precision = 0;
    std::size_t dimension = 0;
    std::size_t truncation = 0;
};

/**
 * Text dump of the coefficients with multi-index in N_{<truncation}^D:
 *
 *     p E D L
 *     l_0 l_1 ... l_{D-1} value      (one line per multi-index, row-major)
 */
inline void write_coefficient_dump(std::ostream& out, const MahlerCoefficients& coeffs,
                                   std::uint32_t prime, std::uint32_t precision,
                                   std::size_t truncation) {
    const auto& grid = coeffs.grid();
    if (truncation < 1 || truncation > grid.extent()) {
        throw std::invalid_argument("dump truncation must lie in [1, extent]");
    }
    out << prime << ' ' << precision << ' ' << grid.dimension() << ' ' << truncation << '\n';
    const std::size_t dims = grid.dimension();
    std::vector<std::size_t> index(dims, 0);
    std::string line;
    while (true) {
        line.clear();
        for (const auto i : index) {
            line += std::to_string(i);
            line += ' ';
        }
        line += std::to_string(grid.at(index));
        line += '\n';
        out << line;
        // Odometer increment, last axis fastest.
        std::size_t d = dims;
        while (d > 0 && ++index[d - 1] == truncation) index[--d] = 0;
        if (d == 0) break;
    }
}

namespace detail {

inline std::vector<std::uint64_t> parse_naturals(const std::string& line, std::size_t line_no) {
    std::vector<std::uint64_t> values;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
        if (pos == line.size()) break;
        std::size_t end = pos;
        std::uint64_t v = 0;
        while (end < line.size() && line[end] >= '0' && line[end] <= '9') {
            const std::uint64_t digit = static_cast<std::uint64_t>(line[end] - '0');
            if (v > (~std::uint64_t{0} - digit) / 10) {
                throw std::runtime_error("line " + std::to_string(line_no) + ": number overflows");
            }
            v = v * 10 + digit;
            ++end;
        }
        if (end == pos || (end < line.size() && line[end] != ' ' && line[end] != '\t' &&
                           line[end] != '\r')) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": expected a decimal natural number in '" + line + "'");
        }
        values.push_back(v);
        pos = end;
    }
    return values;
}

inline bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        return true;
    }
    return false;
}

}  // namespace detail

/**
 * Reads a dump written by write_coefficient_dump into a grid of the given
 * extent (>= L); entries with any index >= L are zero.
 */
inline std::pair<CoefficientDumpHeader, MahlerCoefficients> read_coefficient_dump(
    std::istream& in, std::size_t extent, std::size_t* line_counter = nullptr) {
    std::size_t local_line = 0;
    std::size_t& line_no = line_counter ? *line_counter : local_line;
    std::string line;
    if (!detail::next_content_line(in, line, line_no)) {
        throw std::runtime_error("coefficient dump: missing header line");
    }
    const auto head = detail::parse_naturals(line, line_no);
    if (head.size() != 4) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": header must be 'p E D L'");
    }
    CoefficientDumpHeader header{static_cast<std::uint32_t>(head[0]),
                                 static_cast<std::uint32_t>(head[1]),
                                 static_cast<std::size_t>(head[2]),
                                 static_cast<std::size_t>(head[3])};
    if (!is_prime(header.prime) || header.precision < 1) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": invalid p or E");
    }
    const std::uint64_t modulus = checked_pow(header.prime, header.precision, std::uint64_t{1} << 32);
    if (modulus == 0) throw std::runtime_error("line " + std::to_string(line_no) + ": p^E too large");
    if (header.truncation < 1 || header.truncation > extent) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": L must lie in [1, " +
                                 std::to_string(extent) + "]");
    }
    ResidueGrid grid(header.dimension, extent, modulus);
    const std::uint64_t expected = checked_pow(header.truncation, header.dimension, max_grid_cells);
    std::vector<std::size_t> index(header.dimension, 0);
    for (std::uint64_t row = 0; row < expected; ++row) {
        if (!detail::next_content_line(in, line, line_no)) {
            throw std::runtime_error("coefficient dump truncated after line " +
                                     std::to_string(line_no));
        }
        const auto fields = detail::parse_naturals(line, line_no);
        if (fields.size() != header.dimension + 1) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.dimension + 1) + " fields");
        }
        for (std::size_t d = 0; d < header.dimension; ++d) {
            if (fields[d] != index[d]) {
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": multi-index out of row-major order");
            }
        }
        if (fields.back() >= modulus) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": value not below p^E");
        }
        grid[grid.flat_index(index)] = static_cast<Residue>(fields.back());
        std::size_t d = header.dimension;
        while (d > 0 && ++index[d - 1] == header.truncation) index[--d] = 0;
    }
    return {header, MahlerCoefficients(std::move(grid))};
}

}  // namespace padic_ml
