#pragma once

/**
 * @file games.hpp
 * @brief D-heap Nim as a benchmark for zero-locus learning.
 *
 * Y is the set of P-positions (Grundy number 0, i.e. heap sizes XOR to 0).
 * An estimate "detects" a position as outside Y when its predicted residue
 * is nonzero. Four tasks measure it, all on N_{<2^E}:
 *
 *   1. random positions in N_{<2^E}^D
 *   2. every position of {0} x N_{<2^E}^{D-1}
 *   3. random P-positions in N_{<2^E}^D
 *   4. every P-position of N_{<64} x N_{<2^E}^{D-1}
 *
 * Random draws use std::mt19937_64 seeded with the report seed. Each draw of
 * a value below `b` takes 64-bit outputs and rejects those at or above the
 * largest multiple of `b`, then reduces mod `b`. Task 1 draws coordinates
 * 0..D-1 in order per trial; task 3 draws 0..D-2 and sets the last to their
 * XOR, which is uniform over the P-positions.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "learner.hpp"
#include "mahler.hpp"
#include "padic_core.hpp"

namespace padic_ml {

enum class Task : int {
    random_positions = 1,
    zero_first_heap = 2,
    random_p_positions = 3,
    small_first_heap_p_positions = 4,
};

inline Task task_from_int(int id) {
    if (id < 1 || id > 4) throw std::invalid_argument("task must be 1, 2, 3 or 4, got " + std::to_string(id));
    return static_cast<Task>(id);
}

/// Exclusive bound on the first heap in task 4.
inline constexpr Coordinate task4_first_heap_bound = 64;

enum class EvaluationMode { exhaustive, subsample };

inline Coordinate grundy_nim(const Point& x) noexcept {
    Coordinate g = 0;
    for (const auto c : x) g ^= c;
    return g;
}

/// P-positions with x_d < bounds[d], in lexicographic order.
inline std::vector<Point> generate_p_positions(std::size_t dimension, std::span<const Coordinate> bounds) {
    if (dimension < 1) throw std::invalid_argument("D must be at least 1");
    if (bounds.size() != dimension) throw std::invalid_argument("need one bound per heap");
    std::vector<Point> out;
    for (const auto b : bounds) {
        if (b == 0) return out;
    }
    // The first D-1 heaps run over their box; the last is forced to their XOR.
    std::vector<Coordinate> x(dimension, 0);
    const std::size_t free_axes = dimension - 1;
    while (true) {
        Coordinate last = 0;
        for (std::size_t d = 0; d < free_axes; ++d) last ^= x[d];
        if (last < bounds[free_axes]) {
            x[free_axes] = last;
            out.emplace_back(x);
        }
        std::size_t d = free_axes;
        while (d > 0 && ++x[d - 1] == bounds[d - 1]) x[--d] = 0;
        if (d == 0) break;
    }
    return out;
}

/// All P-positions of N_{<M}^D as a training set.
inline SampleSet nim_samples(const LearningParams& params) {
    const std::vector<Coordinate> bounds(params.dimension(), params.grid_bound());
    return SampleSet(params, generate_p_positions(params.dimension(), bounds));
}

struct BenchmarkReport {
    Task task = Task::random_positions;
    LearningParams params;
    std::optional<std::uint64_t> seed;
    std::string mode;  // exhaustive, random, subsample or baseline
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    // Subsample mode only: size of the full task domain and a 95% Wilson
    // interval for the success rate.
    std::optional<std::uint64_t> domain_size;
    std::optional<std::pair<double, double>> ci95;
    double wall_time_ms = 0.0;

    double success_rate() const {
        return trials == 0 ? 0.0 : static_cast<double>(trials - failures) / static_cast<double>(trials);
    }
};

/// 95% Wilson score interval for `successes` out of `trials`.
inline std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (phat + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/**
 * Line-oriented `key: value` text. wall_time_ms is written only when asked,
 * so that identical runs produce identical bytes.
 */
inline std::string format_report(const BenchmarkReport& r, bool include_timing = false) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(6);
    out << "task: " << static_cast<int>(r.task) << '\n'
        << "p: " << r.params.prime() << '\n'
        << "E: " << r.params.precision() << '\n'
        << "D: " << r.params.dimension() << '\n'
        << "M: " << r.params.grid_bound() << '\n'
        << "L: " << r.params.truncation() << '\n'
        << "seed: " << (r.seed ? std::to_string(*r.seed) : std::string("none")) << '\n'
        << "mode: " << r.mode << '\n'
        << "trials: " << r.trials << '\n'
        << "failures: " << r.failures << '\n'
        << "success_rate: " << r.success_rate() << '\n';
    if (r.domain_size) out << "domain_size: " << *r.domain_size << '\n';
    if (r.ci95) {
        out << "ci95_low: " << r.ci95->first << '\n' << "ci95_high: " << r.ci95->second << '\n';
    }
    if (include_timing) out << "wall_time_ms: " << std::llround(r.wall_time_ms) << '\n';
    return out.str();
}

namespace detail {

inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    // 2^64 mod bound, computed without overflow.
    const std::uint64_t excess = (std::uint64_t{0} - bound) % bound;
    const std::uint64_t limit = std::uint64_t{0} - excess;  // 0 means "accept everything"
    while (true) {
        const std::uint64_t r = rng();
        if (limit == 0 || r < limit) return r % bound;
    }
}

inline std::uint64_t side_length(const LearningParams& params) {
    return std::uint64_t{1} << params.precision();
}

inline void require_benchmark_params(const LearningParams& params, Task task) {
    if (std::uint64_t{params.precision()} * params.dimension() > 62) {
        throw std::invalid_argument("benchmark needs E*D <= 62 so task domains fit 64-bit counts");
    }
    if (task == Task::small_first_heap_p_positions && side_length(params) < task4_first_heap_bound) {
        throw std::invalid_argument("task 4 needs 2^E >= 64 (E >= 6)");
    }
}

/// Per-axis bounds of the box swept by the exhaustive tasks. For task 4 only
/// the first D-1 axes are listed; the last heap is their XOR.
inline std::vector<Coordinate> task_box(const LearningParams& params, Task task) {
    const std::size_t dims = params.dimension();
    const Coordinate side = side_length(params);
    if (task == Task::zero_first_heap) {
        std::vector<Coordinate> bounds(dims, side);
        bounds[0] = 1;
        return bounds;
    }
    std::vector<Coordinate> bounds(dims - 1, side);
    if (!bounds.empty()) bounds[0] = task4_first_heap_bound;
    return bounds;
}

inline std::uint64_t box_volume(std::span<const Coordinate> bounds) {
    std::uint64_t v = 1;
    for (const auto b : bounds) v *= b;
    return v;
}

/// Decodes `rank` into a point of the box, last axis fastest.
inline std::vector<Coordinate> unrank(std::uint64_t rank, std::span<const Coordinate> bounds) {
    std::vector<Coordinate> x(bounds.size());
    for (std::size_t d = bounds.size(); d-- > 0;) {
        x[d] = rank % bounds[d];
        rank /= bounds[d];
    }
    return x;
}

/// Completes a task-2 or task-4 box point into the queried position.
inline Point task_point(Task task, std::vector<Coordinate> box_point) {
    if (task == Task::small_first_heap_p_positions) {
        Coordinate last = 0;
        for (const auto c : box_point) last ^= c;
        box_point.push_back(last);
    }
    return Point(std::move(box_point));
}

/**
 * Contracts the coefficient grid through every prefix of the box and hands
 * the remaining coefficients to `leaf(prefix, rest)`. With bounds of length
 * k the rest has dimension D - k.
 */
inline void sweep_prefixes(const ResidueGrid& grid, std::span<const Coordinate> bounds,
                           const BinomialTable& table, std::vector<Coordinate>& prefix,
                           const std::function<void(const std::vector<Coordinate>&, const ResidueGrid&)>& leaf) {
    const std::size_t depth = prefix.size();
    if (depth == bounds.size()) {
        leaf(prefix, grid);
        return;
    }
    prefix.push_back(0);
    for (Coordinate x = 0; x < bounds[depth]; ++x) {
        prefix.back() = x;
        const ResidueGrid rest = contract_leading(grid, x, table);
        sweep_prefixes(rest, bounds, table, prefix, leaf);
    }
    prefix.pop_back();
}

inline std::uint64_t exhaustive_failures(const DefiningFunctionEstimate& est, Task task,
                                         std::uint64_t& trials) {
    const auto& params = est.params();
    const auto& table = est.table();
    const auto box = task_box(params, task);
    std::uint64_t failures = 0;
    trials = 0;
    std::vector<Coordinate> prefix;
    if (task == Task::zero_first_heap) {
        // Sweep all but the last axis; the leaf runs the last axis over its bound.
        const std::span<const Coordinate> head(box.data(), box.size() - 1);
        const Coordinate last_bound = box.back();
        sweep_prefixes(est.coefficients().grid(), head, table, prefix,
                       [&](const std::vector<Coordinate>& pre, const ResidueGrid& line) {
                           Coordinate g = 0;
                           for (const auto c : pre) g ^= c;
                           for (Coordinate x = 0; x < last_bound; ++x) {
                               const bool member = evaluate_line(line.data(), x, table) == 0;
                               const bool in_y = (g ^ x) == 0;
                               failures += member != in_y;
                           }
                           trials += last_bound;
                       });
    } else {
        sweep_prefixes(est.coefficients().grid(), box, table, prefix,
                       [&](const std::vector<Coordinate>& pre, const ResidueGrid& line) {
                           Coordinate g = 0;
                           for (const auto c : pre) g ^= c;
                           failures += evaluate_line(line.data(), g, table) != 0;
                           ++trials;
                       });
    }
    return failures;
}

}  // namespace detail

struct RunOptions {
    std::uint64_t trials = 0;  // tasks 1 and 3
    std::uint64_t seed = 0;
    EvaluationMode mode = EvaluationMode::exhaustive;  // tasks 2 and 4
    std::uint64_t subsample_points = 10000;
};

/// One trial point of task 1 (any position) or task 3 (a P-position) in N_{<2^E}^D.
inline Point draw_random_position(std::mt19937_64& rng, Task task, const LearningParams& params) {
    const std::uint64_t side = detail::side_length(params);
    const std::size_t dims = params.dimension();
    std::vector<Coordinate> coords(dims);
    if (task == Task::random_positions) {
        for (auto& c : coords) c = detail::uniform_below(rng, side);
    } else if (task == Task::random_p_positions) {
        Coordinate last = 0;
        for (std::size_t d = 0; d + 1 < dims; ++d) {
            coords[d] = detail::uniform_below(rng, side);
            last ^= coords[d];
        }
        coords[dims - 1] = last;
    } else {
        throw std::invalid_argument("only tasks 1 and 3 draw random positions");
    }
    return Point(std::move(coords));
}

/// Failure rule: is_member(x) disagrees with grundy_nim(x) == 0.
inline std::uint64_t count_membership_failures(const DefiningFunctionEstimate& est,
                                               std::span<const Point> queries) {
    SlicedEvaluator eval(est);
    std::uint64_t failures = 0;
    for (const auto& x : queries) failures += (eval(x) == 0) != (grundy_nim(x) == 0);
    return failures;
}

inline BenchmarkReport run_task(const DefiningFunctionEstimate& est, Task task, const RunOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    const auto& params = est.params();
    detail::require_benchmark_params(params, task);
    BenchmarkReport report{task, params};
    if (task == Task::random_positions || task == Task::random_p_positions) {
        if (options.trials == 0) throw std::invalid_argument("tasks 1 and 3 need trials > 0");
        report.seed = options.seed;
        report.mode = "random";
        report.trials = options.trials;
        std::mt19937_64 rng(options.seed);
        SlicedEvaluator eval(est);
        for (std::uint64_t t = 0; t < options.trials; ++t) {
            const Point x = draw_random_position(rng, task, params);
            report.failures += (eval(x) == 0) != (grundy_nim(x) == 0);
        }
    } else if (options.mode == EvaluationMode::exhaustive) {
        report.mode = "exhaustive";
        report.failures = detail::exhaustive_failures(est, task, report.trials);
    } else {
        // Stratified subsample: split the domain (in lexicographic order) into
        // equal contiguous strata and draw one point uniformly from each.
        if (options.subsample_points == 0) throw std::invalid_argument("subsample needs points > 0");
        const auto box = detail::task_box(params, task);
        const std::uint64_t domain = detail::box_volume(box);
        const std::uint64_t strata = std::min(options.subsample_points, domain);
        report.seed = options.seed;
        report.mode = "subsample";
        report.domain_size = domain;
        report.trials = strata;
        std::mt19937_64 rng(options.seed);
        SlicedEvaluator eval(est);
        for (std::uint64_t s = 0; s < strata; ++s) {
            // Stratum s covers ranks [s*domain/strata, (s+1)*domain/strata).
            const auto lo = static_cast<std::uint64_t>((static_cast<unsigned __int128>(s) * domain) / strata);
            const auto hi = static_cast<std::uint64_t>((static_cast<unsigned __int128>(s + 1) * domain) / strata);
            const std::uint64_t rank = lo + detail::uniform_below(rng, hi - lo);
            const Point x = detail::task_point(task, detail::unrank(rank, box));
            report.failures += (eval(x) == 0) != (grundy_nim(x) == 0);
        }
        report.ci95 = wilson_interval(report.trials - report.failures, report.trials);
    }
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return report;
}

/**
 * Exact report of the predictor that calls every position "not in Y".
 * It fails precisely on the P-positions of each task domain; tasks 1 and 3
 * are reported over the full domain instead of a random draw.
 */
inline BenchmarkReport trivial_baseline(Task task, const LearningParams& params) {
    detail::require_benchmark_params(params, task);
    BenchmarkReport report{task, params};
    report.mode = "baseline";
    const std::uint64_t e = params.precision();
    const std::uint64_t dims = params.dimension();
    // P-positions in N_{<2^E}^D: the first D-1 heaps are free.
    const std::uint64_t all_p = std::uint64_t{1} << (e * (dims - 1));
    // With a heap pinned (to 0, or to a value below 64) one fewer heap is free.
    const std::uint64_t pinned_p = dims == 1 ? 1 : std::uint64_t{1} << (e * (dims - 2));
    switch (task) {
        case Task::random_positions:
            report.trials = std::uint64_t{1} << (e * dims);
            report.failures = all_p;
            break;
        case Task::zero_first_heap:
            report.trials = all_p;
            report.failures = pinned_p;
            break;
        case Task::random_p_positions:
            report.trials = all_p;
            report.failures = all_p;
            break;
        case Task::small_first_heap_p_positions:
            report.trials = dims == 1 ? 1 : task4_first_heap_bound * pinned_p;
            report.failures = report.trials;
            break;
    }
    return report;
}

}  // namespace padic_ml
