#pragma once

/**
 * @file learner.hpp
 * @brief Estimate the defining function of a closed Y in Z_p^D mod p^E from
 *        samples, and predict membership through its Mahler expansion.
 *
 * The defining function sends x to p^v, where v is the largest l-infinity
 * valuation between x and Y; on Y itself v is infinite and the value is 0.
 * Learning evaluates that function against the samples on N_{<M}^D with a
 * kd-trie, transforms the value grid to Mahler coefficients and keeps the
 * coefficients with every index below L.
 */

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kd_trie.hpp"
#include "mahler.hpp"
#include "padic_core.hpp"

namespace padic_ml {

/// Nonempty training points of Y, every coordinate below M.
class SampleSet {
public:
    SampleSet(LearningParams params, std::vector<Point> points)
        : params_(std::move(params)), points_(std::move(points)) {
        if (points_.empty()) throw std::invalid_argument("sample set is empty");
        for (const auto& x : points_) {
            require_dimension(x, params_.dimension());
            for (const auto c : x) {
                if (c >= params_.grid_bound()) {
                    throw std::invalid_argument("sample " + to_string(x) + " has a coordinate >= M=" +
                                                std::to_string(params_.grid_bound()));
                }
            }
        }
    }

    const LearningParams& params() const noexcept { return params_; }
    std::span<const Point> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    LearningParams params_;
    std::vector<Point> points_;
};

/// p^v mod p^E with v the nearest-neighbour valuation of every grid point.
inline ResidueGrid build_value_grid(const SampleSet& samples) {
    const auto& params = samples.params();
    const KdTrie trie(params, samples.points());
    const ResidueRing ring = params.ring();
    const std::size_t dims = params.dimension();
    const std::size_t bound = params.grid_bound();

    // p^v for v in [0, E]; p^E wraps to 0.
    std::vector<Residue> powers(params.precision() + 1);
    for (std::uint32_t v = 0; v <= params.precision(); ++v) powers[v] = ring.pow(params.prime(), v);

    ResidueGrid grid(dims, bound, params.modulus());
    Point x(std::vector<Coordinate>(dims, 0));
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        grid[flat] = powers[trie.nns_valuation(x)];
        for (std::size_t d = dims; d-- > 0;) {
            if (++x[d] < bound) break;
            x[d] = 0;
        }
    }
    return grid;
}

/// Learned Mahler expansion of the defining function, ready for prediction
/// on N_{<max(p^E, M)}^D.
class DefiningFunctionEstimate {
public:
    DefiningFunctionEstimate(LearningParams params, MahlerCoefficients coeffs)
        : params_(std::move(params)), coeffs_(std::move(coeffs)), table_(params_) {
        const auto& grid = coeffs_.grid();
        if (grid.dimension() != params_.dimension() || grid.extent() != params_.grid_bound() ||
            grid.modulus() != params_.modulus()) {
            throw std::invalid_argument("coefficient grid does not match learning params");
        }
    }

    const LearningParams& params() const noexcept { return params_; }
    const MahlerCoefficients& coefficients() const noexcept { return coeffs_; }
    const BinomialTable& table() const noexcept { return table_; }

    /// Throws std::out_of_range unless x lies in the prediction domain.
    void require_in_domain(const Point& x) const {
        require_dimension(x, params_.dimension());
        for (const auto c : x) {
            if (c >= params_.prediction_bound()) {
                throw std::out_of_range("point " + to_string(x) + " has a coordinate >= " +
                                        std::to_string(params_.prediction_bound()) +
                                        " (prediction domain is below max(p^E, M))");
            }
        }
    }

    Residue predict_residue(const Point& x) const {
        require_in_domain(x);
        return evaluate(coeffs_, x, table_);
    }

    /// Zero residue means "in Y".
    bool is_member(const Point& x) const { return predict_residue(x) == 0; }

    /// `params p E D M L` followed by the coefficient dump truncated at L.
    void save(std::ostream& out) const {
        out << "params " << params_.prime() << ' ' << params_.precision() << ' '
            << params_.dimension() << ' ' << params_.grid_bound() << ' ' << params_.truncation()
            << '\n';
        write_coefficient_dump(out, coeffs_, params_.prime(), params_.precision(),
                               params_.truncation());
    }

    static DefiningFunctionEstimate load(std::istream& in) {
        std::size_t line_no = 0;
        std::string line;
        if (!detail::next_content_line(in, line, line_no) || line.rfind("params ", 0) != 0) {
            throw std::runtime_error("model: line " + std::to_string(line_no) +
                                     ": expected 'params p E D M L'");
        }
        const auto fields = detail::parse_naturals(line.substr(7), line_no);
        if (fields.size() != 5) {
            throw std::runtime_error("model: line " + std::to_string(line_no) +
                                     ": expected 'params p E D M L'");
        }
        LearningParams params(static_cast<std::uint32_t>(fields[0]),
                              static_cast<std::uint32_t>(fields[1]),
                              static_cast<std::uint32_t>(fields[2]),
                              static_cast<std::size_t>(fields[3]),
                              static_cast<std::size_t>(fields[4]));
        auto [header, coeffs] = read_coefficient_dump(in, params.grid_bound(), &line_no);
        if (header.prime != params.prime() || header.precision != params.precision() ||
            header.dimension != params.dimension() || header.truncation != params.truncation()) {
            throw std::runtime_error("model: coefficient header disagrees with params line");
        }
        return DefiningFunctionEstimate(std::move(params), std::move(coeffs));
    }

private:
    LearningParams params_;
    MahlerCoefficients coeffs_;
    BinomialTable table_;
};

inline DefiningFunctionEstimate learn(const SampleSet& samples) {
    auto coeffs = forward_transform(build_value_grid(samples));
    truncate(coeffs, samples.params().truncation());
    return DefiningFunctionEstimate(samples.params(), std::move(coeffs));
}

/**
 * Evaluates an estimate at many points, memoising the contraction over the
 * first coordinate. Points sharing x_0 then cost O(M^{D-1}) instead of
 * O(M^D). Not safe for concurrent use.
 */
class SlicedEvaluator {
public:
    explicit SlicedEvaluator(const DefiningFunctionEstimate& estimate) : estimate_(&estimate) {}

    /// Coefficients of x -> F(x0, x) in the remaining D-1 coordinates.
    const ResidueGrid& leading_slice(Coordinate x0) {
        auto it = slices_.find(x0);
        if (it == slices_.end()) {
            if (x0 >= estimate_->params().prediction_bound()) {
                throw std::out_of_range("coordinate " + std::to_string(x0) + " outside prediction domain");
            }
            it = slices_.emplace(x0, contract_leading(estimate_->coefficients().grid(), x0,
                                                      estimate_->table()))
                     .first;
        }
        return it->second;
    }

    Residue operator()(const Point& x) {
        estimate_->require_in_domain(x);
        const ResidueGrid& slice = leading_slice(x[0]);
        if (x.size() == 1) return slice[0];
        ResidueGrid current = contract_leading(slice, x[1], estimate_->table());
        for (std::size_t d = 2; d < x.size(); ++d) {
            current = contract_leading(current, x[d], estimate_->table());
        }
        return current[0];
    }

    void clear() { slices_.clear(); }

private:
    const DefiningFunctionEstimate* estimate_;
    std::unordered_map<Coordinate, ResidueGrid> slices_;
};

}  // namespace padic_ml
