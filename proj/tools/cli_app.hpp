#pragma once

// Command-line front end: gen-samples, learn, predict, bench, dump-coeffs.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "padic_ml/padic_ml.hpp"

namespace padic_ml::cli {

struct RunConfig {
    std::string command;
    std::uint32_t prime = 2;
    std::uint32_t precision = 10;
    std::uint32_t dimension = 3;
    std::size_t grid_bound = 100;
    std::optional<std::size_t> truncation;  // defaults to M
    int task = 0;
    std::optional<std::uint64_t> trials;
    std::uint64_t seed = 0;
    std::string in;
    std::string out;
    std::string point;
    std::string mode = "exhaustive";
    std::uint64_t subsample_points = 10000;
    bool timing = false;

    LearningParams params() const {
        return LearningParams(prime, precision, dimension, grid_bound, truncation.value_or(grid_bound));
    }
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    if (path.empty()) throw std::runtime_error("--in is required for this command");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
    return in;
}

/// Writes to --out when given, otherwise to `fallback`.
template <class Body>
void with_output(const std::string& path, std::ostream& fallback, Body&& body) {
    if (path.empty()) {
        body(fallback);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    body(out);
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline DefiningFunctionEstimate load_model(const std::string& path) {
    auto in = open_input(path);
    return DefiningFunctionEstimate::load(in);
}

inline Point parse_point(const std::string& text, std::size_t dimension) {
    std::istringstream in(text);
    auto points = read_points(in, dimension);
    if (points.size() != 1) throw std::runtime_error("--point must hold exactly one point");
    return points.front();
}

}  // namespace detail

inline int gen_samples(const RunConfig& cfg, std::ostream& out) {
    const auto params = cfg.params();
    const auto samples = nim_samples(params);
    detail::with_output(cfg.out, out, [&](std::ostream& os) { write_points(os, samples.points()); });
    return 0;
}

inline int learn_model(const RunConfig& cfg, std::ostream& out) {
    const auto params = cfg.params();
    auto in = detail::open_input(cfg.in);
    SampleSet samples(params, read_points(in, params.dimension()));
    const auto est = learn(samples);
    detail::with_output(cfg.out, out, [&](std::ostream& os) { est.save(os); });
    return 0;
}

inline int predict(const RunConfig& cfg, std::ostream& out) {
    if (cfg.point.empty()) throw std::runtime_error("--point is required for predict");
    const auto est = detail::load_model(cfg.in);
    const Point x = detail::parse_point(cfg.point, est.params().dimension());
    const Residue r = est.predict_residue(x);
    out << "point=" << to_string(x) << " residue=" << r << " verdict=" << (r == 0 ? "member" : "non-member")
        << '\n';
    return 0;
}

inline int bench(const RunConfig& cfg, std::ostream& out) {
    if (cfg.task == 0) throw std::runtime_error("--task is required for bench");
    const Task task = task_from_int(cfg.task);
    RunOptions options;
    options.seed = cfg.seed;
    options.subsample_points = cfg.subsample_points;
    if (cfg.mode == "exhaustive") {
        options.mode = EvaluationMode::exhaustive;
    } else if (cfg.mode == "subsample") {
        options.mode = EvaluationMode::subsample;
    } else {
        throw std::runtime_error("--mode must be 'exhaustive' or 'subsample', got '" + cfg.mode + "'");
    }
    // Trial counts of the reference runs.
    options.trials = cfg.trials.value_or(task == Task::random_p_positions ? 50000 : 100000);

    std::optional<DefiningFunctionEstimate> est;
    if (cfg.in.empty()) {
        est.emplace(learn(nim_samples(cfg.params())));
    } else {
        est.emplace(detail::load_model(cfg.in));
    }
    const auto report = run_task(*est, task, options);
    detail::with_output(cfg.out, out, [&](std::ostream& os) { os << format_report(report, cfg.timing); });
    return 0;
}

inline int dump_coeffs(const RunConfig& cfg, std::ostream& out) {
    const auto est = detail::load_model(cfg.in);
    const auto& p = est.params();
    detail::with_output(cfg.out, out, [&](std::ostream& os) {
        write_coefficient_dump(os, est.coefficients(), p.prime(), p.precision(), p.truncation());
    });
    return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"p-adic zero-locus learning with Mahler interpolation and Nim benchmarks"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    RunConfig cfg;
    std::size_t truncation = 0;
    std::uint64_t trials = 0;
    app.add_option("--p", cfg.prime, "prime p")->capture_default_str();
    app.add_option("--E", cfg.precision, "number of p-adic digits E")->capture_default_str();
    app.add_option("--D", cfg.dimension, "dimension D")->capture_default_str();
    app.add_option("--M", cfg.grid_bound, "grid bound M")->capture_default_str();
    auto* l_opt = app.add_option("--L", truncation, "coefficient truncation L (default M)");
    app.add_option("--task", cfg.task, "benchmark task 1-4")->check(CLI::Range(1, 4));
    auto* trials_opt = app.add_option("--trials", trials, "trials for tasks 1 and 3");
    app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    app.add_option("--in", cfg.in, "input file (samples or model)");
    app.add_option("--out", cfg.out, "output file (default stdout)");
    app.add_option("--point", cfg.point, "query point, D space-separated naturals");
    app.add_option("--mode", cfg.mode, "exhaustive | subsample (tasks 2, 4)")->capture_default_str();
    app.add_option("--subsample", cfg.subsample_points, "points drawn in subsample mode")
        ->capture_default_str();
    app.add_flag("--timing", cfg.timing, "append wall_time_ms to the report");

    app.add_subcommand("gen-samples", "write all P-positions of N_{<M}^D");
    app.add_subcommand("learn", "learn a model from a sample file");
    app.add_subcommand("predict", "predict membership of --point");
    app.add_subcommand("bench", "run a Nim benchmark task");
    app.add_subcommand("dump-coeffs", "write the coefficient dump of a model");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (l_opt->count() > 0) cfg.truncation = truncation;
    if (trials_opt->count() > 0) cfg.trials = trials;

    try {
        // Every command validates params before touching files.
        (void)cfg.params();
        if (cfg.command == "gen-samples") return gen_samples(cfg, out);
        if (cfg.command == "learn") return learn_model(cfg, out);
        if (cfg.command == "predict") return predict(cfg, out);
        if (cfg.command == "bench") return bench(cfg, out);
        return dump_coeffs(cfg, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace padic_ml::cli
