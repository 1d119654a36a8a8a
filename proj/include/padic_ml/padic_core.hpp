#pragma once

/**
 * @file padic_core.hpp
 * @brief Prime-power residues, p-adic valuations, digit interleaving and
 *        Pascal-triangle binomial tables.
 *
 * Everything here works on natural numbers truncated to a fixed precision:
 * residues live in [0, p^E) and a point of N^D is read as an element of
 * Z_p^D through its lowest E base-p digits per coordinate.
 */

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace padic_ml {

using Residue = std::uint32_t;
using Coordinate = std::uint64_t;
using DigitString = std::vector<std::uint32_t>;

/// Largest number of residues a BinomialTable may hold unless told otherwise.
inline constexpr std::size_t default_table_budget = std::size_t{1} << 26;

/// Largest number of cells a value or coefficient grid may hold.
inline constexpr std::size_t max_grid_cells = std::size_t{1} << 28;

constexpr bool is_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

/// base^exponent, or 0 when the result would exceed `limit`.
constexpr std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exponent,
                                    std::uint64_t limit) noexcept {
    std::uint64_t result = 1;
    for (std::uint64_t i = 0; i < exponent; ++i) {
        if (base != 0 && result > limit / base) return 0;
        result *= base;
    }
    return result;
}

/**
 * Arithmetic in Z / p^E Z.
 *
 * The modulus is at most 2^32 so that the product of two residues fits a
 * 64-bit word without reduction.
 */
class ResidueRing {
public:
    explicit ResidueRing(std::uint64_t modulus) : modulus_(modulus) {
        if (modulus < 2 || modulus > (std::uint64_t{1} << 32)) {
            throw std::invalid_argument("residue modulus must lie in [2, 2^32], got " +
                                        std::to_string(modulus));
        }
    }

    std::uint64_t modulus() const noexcept { return modulus_; }

    Residue reduce(std::uint64_t x) const noexcept { return static_cast<Residue>(x % modulus_); }

    Residue reduce_signed(std::int64_t x) const noexcept {
        const auto m = static_cast<std::int64_t>(modulus_);
        auto r = x % m;
        return static_cast<Residue>(r < 0 ? r + m : r);
    }

    Residue add(Residue a, Residue b) const noexcept {
        const std::uint64_t s = std::uint64_t{a} + b;
        return static_cast<Residue>(s >= modulus_ ? s - modulus_ : s);
    }

    Residue sub(Residue a, Residue b) const noexcept {
        return static_cast<Residue>(a >= b ? a - b : std::uint64_t{a} + modulus_ - b);
    }

    Residue neg(Residue a) const noexcept { return sub(0, a); }

    Residue mul(Residue a, Residue b) const noexcept {
        return static_cast<Residue>((std::uint64_t{a} * b) % modulus_);
    }

    Residue pow(Residue base, std::uint64_t exponent) const noexcept {
        Residue result = reduce(1);
        Residue b = base;
        while (exponent != 0) {
            if (exponent & 1) result = mul(result, b);
            b = mul(b, b);
            exponent >>= 1;
        }
        return result;
    }

private:
    std::uint64_t modulus_;
};

/**
 * The hyper-parameters (p, E, D, M, L) shared by every stage of learning.
 *
 *  - prime:      p, the residue characteristic
 *  - precision:  E, the number of p-adic digits kept
 *  - dimension:  D
 *  - grid_bound: M, samples and interpolation nodes live in N_{<M}^D
 *  - truncation: L <= M, per-axis cutoff of the Mahler coefficients
 *
 * Predictions are made on N_{<max(p^E, M)}^D. Construction validates
 * primality and that every derived size (p^E, M^D, and the binomial table
 * used for prediction) is representable.
 */
class LearningParams {
public:
    LearningParams(std::uint32_t prime, std::uint32_t precision, std::uint32_t dimension,
                   std::size_t grid_bound, std::size_t truncation,
                   std::size_t table_budget = default_table_budget)
        : prime_(prime),
          precision_(precision),
          dimension_(dimension),
          grid_bound_(grid_bound),
          truncation_(truncation) {
        if (!is_prime(prime)) {
            throw std::invalid_argument("p must be prime, got " + std::to_string(prime));
        }
        if (precision < 1) throw std::invalid_argument("E must be at least 1");
        if (dimension < 1) throw std::invalid_argument("D must be at least 1");
        if (grid_bound < 1) throw std::invalid_argument("M must be at least 1");
        if (truncation < 1 || truncation > grid_bound) {
            throw std::invalid_argument("L must satisfy 1 <= L <= M, got L=" +
                                        std::to_string(truncation) +
                                        " M=" + std::to_string(grid_bound));
        }
        modulus_ = checked_pow(prime, precision, std::uint64_t{1} << 32);
        if (modulus_ == 0) {
            throw std::invalid_argument("p^E exceeds 2^32 (p=" + std::to_string(prime) +
                                        ", E=" + std::to_string(precision) + ")");
        }
        grid_cells_ = checked_pow(grid_bound, dimension, max_grid_cells);
        if (grid_cells_ == 0) {
            throw std::invalid_argument("M^D exceeds the grid capacity of " +
                                        std::to_string(max_grid_cells) + " cells");
        }
        if (grid_bound > table_budget / prediction_bound()) {
            throw std::invalid_argument("binomial table of max(p^E, M) x M entries exceeds budget of " +
                                        std::to_string(table_budget));
        }
    }

    std::uint32_t prime() const noexcept { return prime_; }
    std::uint32_t precision() const noexcept { return precision_; }
    std::uint32_t dimension() const noexcept { return dimension_; }
    std::size_t grid_bound() const noexcept { return grid_bound_; }
    std::size_t truncation() const noexcept { return truncation_; }

    /// p^E
    std::uint64_t modulus() const noexcept { return modulus_; }
    /// Exclusive per-axis bound of the prediction domain, max(p^E, M).
    std::uint64_t prediction_bound() const noexcept {
        return modulus_ > grid_bound_ ? modulus_ : std::uint64_t{grid_bound_};
    }
    /// M^D
    std::size_t grid_cells() const noexcept { return static_cast<std::size_t>(grid_cells_); }
    ResidueRing ring() const { return ResidueRing(modulus_); }

    friend bool operator==(const LearningParams&, const LearningParams&) = default;

private:
    std::uint32_t prime_;
    std::uint32_t precision_;
    std::uint32_t dimension_;
    std::size_t grid_bound_;
    std::size_t truncation_;
    std::uint64_t modulus_ = 0;
    std::uint64_t grid_cells_ = 0;
};

/// A position in N^D.
class Point {
public:
    Point() = default;
    explicit Point(std::vector<Coordinate> coords) : coords_(std::move(coords)) {}
    Point(std::initializer_list<Coordinate> coords) : coords_(coords) {}

    std::size_t size() const noexcept { return coords_.size(); }
    Coordinate operator[](std::size_t d) const { return coords_[d]; }
    Coordinate& operator[](std::size_t d) { return coords_[d]; }
    std::span<const Coordinate> coords() const noexcept { return coords_; }

    auto begin() const noexcept { return coords_.begin(); }
    auto end() const noexcept { return coords_.end(); }

    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point&, const Point&) = default;

private:
    std::vector<Coordinate> coords_;
};

inline std::string to_string(const Point& x) {
    std::string out = "(";
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (d != 0) out += ",";
        out += std::to_string(x[d]);
    }
    return out + ")";
}

inline void require_dimension(const Point& x, std::size_t dimension) {
    if (x.size() != dimension) {
        throw std::invalid_argument("point " + to_string(x) + " has " + std::to_string(x.size()) +
                                    " coordinates, expected " + std::to_string(dimension));
    }
}

/// Valuation of a magnitude, capped at `cap`; zero maps to `cap`.
constexpr std::uint32_t magnitude_valuation(std::uint64_t m, std::uint32_t prime,
                                            std::uint32_t cap) noexcept {
    if (m == 0) return cap;
    std::uint32_t v = 0;
    while (v < cap && m % prime == 0) {
        m /= prime;
        ++v;
    }
    return v;
}

/**
 * p-adic valuation of x, capped at `cap`.
 *
 * Zero (and anything divisible by p^cap) returns `cap`, which stands in for
 * an infinite valuation.
 */
constexpr std::uint32_t valuation(std::int64_t x, std::uint32_t prime, std::uint32_t cap) noexcept {
    const std::uint64_t m = x < 0 ? ~static_cast<std::uint64_t>(x) + 1 : static_cast<std::uint64_t>(x);
    return magnitude_valuation(m, prime, cap);
}

/// Valuation of x - y in the l-infinity sense: the minimum over axes of the
/// capped coordinate valuations.
inline std::uint32_t linf_valuation(const Point& x, const Point& y, std::uint32_t prime,
                                    std::uint32_t cap) {
    std::uint32_t v = cap;
    for (std::size_t d = 0; d < x.size() && v != 0; ++d) {
        const std::uint64_t gap = x[d] >= y[d] ? x[d] - y[d] : y[d] - x[d];
        const std::uint32_t vd = magnitude_valuation(gap, prime, cap);
        if (vd < v) v = vd;
    }
    return v;
}

/**
 * Interleaved base-p expansion of x.
 *
 * Entry e*D + d is the e-th base-p digit of coordinate d, for e < E. Digits
 * above position E are dropped, so coordinates are effectively taken mod p^E.
 */
inline DigitString expand(const LearningParams& params, const Point& x) {
    const std::size_t dims = params.dimension();
    require_dimension(x, dims);
    const std::uint32_t p = params.prime();
    std::vector<Coordinate> rest(x.begin(), x.end());
    DigitString digits;
    digits.reserve(std::size_t{params.precision()} * dims);
    for (std::uint32_t e = 0; e < params.precision(); ++e) {
        for (std::size_t d = 0; d < dims; ++d) {
            digits.push_back(static_cast<std::uint32_t>(rest[d] % p));
            rest[d] /= p;
        }
    }
    return digits;
}

/**
 * C(n, k) mod p^E for 0 <= n <= max_n, 0 <= k <= max_k, filled row by row
 * with Pascal's rule.
 */
class BinomialTable {
public:
    BinomialTable(std::uint64_t modulus, std::size_t max_n, std::size_t max_k,
                  std::size_t budget = default_table_budget)
        : ring_(modulus), max_n_(max_n), max_k_(max_k) {
        const std::size_t rows = max_n + 1;
        const std::size_t cols = max_k + 1;
        if (rows == 0 || cols == 0 || cols > budget / rows) {
            throw std::length_error("binomial table of " + std::to_string(rows) + " x " +
                                    std::to_string(cols) + " entries exceeds budget of " +
                                    std::to_string(budget));
        }
        data_.assign(rows * cols, 0);
        data_[0] = ring_.reduce(1);
        for (std::size_t n = 1; n <= max_n; ++n) {
            Residue* row = &data_[n * cols];
            const Residue* prev = &data_[(n - 1) * cols];
            row[0] = prev[0];
            for (std::size_t k = 1; k < cols; ++k) row[k] = ring_.add(prev[k - 1], prev[k]);
        }
    }

    /// Table sized for params: every prediction argument and every Mahler
    /// index below M.
    explicit BinomialTable(const LearningParams& params)
        : BinomialTable(params.modulus(), params.prediction_bound() - 1, params.grid_bound() - 1) {}

    std::uint64_t modulus() const noexcept { return ring_.modulus(); }
    std::size_t max_n() const noexcept { return max_n_; }
    std::size_t max_k() const noexcept { return max_k_; }
    bool covers(std::uint64_t n, std::uint64_t k) const noexcept { return n <= max_n_ && k <= max_k_; }

    Residue operator()(std::size_t n, std::size_t k) const noexcept {
        return data_[n * (max_k_ + 1) + k];
    }

    Residue at(std::uint64_t n, std::uint64_t k) const {
        if (!covers(n, k)) {
            throw std::out_of_range("binomial C(" + std::to_string(n) + "," + std::to_string(k) +
                                    ") outside table bounds n<=" + std::to_string(max_n_) +
                                    ", k<=" + std::to_string(max_k_));
        }
        return (*this)(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
    }

    /// C(n, 0..max_k) mod p^E.
    std::span<const Residue> row(std::uint64_t n) const {
        if (n > max_n_) {
            throw std::out_of_range("binomial row " + std::to_string(n) +
                                    " outside table bound " + std::to_string(max_n_));
        }
        return {data_.data() + static_cast<std::size_t>(n) * (max_k_ + 1), max_k_ + 1};
    }

private:
    ResidueRing ring_;
    std::size_t max_n_;
    std::size_t max_k_;
    std::vector<Residue> data_;
};

}  // namespace padic_ml
