#include "commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fresh/curves.hpp"
#include "fresh/engine.hpp"
#include "fresh/experiments.hpp"
#include "fresh/frechet.hpp"
#include "fresh/lsh.hpp"
#include "fresh/report.hpp"

namespace fresh::cli {

namespace {

namespace fs = std::filesystem;

struct DatasetOptions {
    std::string path;
    std::string format = "series1d";
    bool skip_first_field = false;
    double densify = 0.0;
};

struct RadiusOptions {
    double radius = 0.0;
    int percentile = 0;
    std::size_t sample_size = 1000;
};

void add_dataset_options(CLI::App* cmd, DatasetOptions& o) {
    cmd->add_option("--dataset", o.path, "Dataset file (series1d) or trajectory list (traj2d)")
        ->required();
    cmd->add_option("--format", o.format, "Dataset format")
        ->check(CLI::IsMember({"series1d", "traj2d"}))
        ->capture_default_str();
    cmd->add_flag("--skip-first-field", o.skip_first_field,
                  "Drop the leading label field of every series1d line");
    cmd->add_option("--densify", o.densify,
                    "Subdivide edges longer than this length before processing")
        ->check(CLI::PositiveNumber);
}

void add_radius_options(CLI::App* cmd, RadiusOptions& o) {
    auto* radius = cmd->add_option("--radius", o.radius, "Query radius")->check(CLI::PositiveNumber);
    auto* pct = cmd->add_option("--percentile", o.percentile,
                                "Use this percentile of sampled pairwise distances as radius")
                    ->check(CLI::IsMember({1, 5}));
    radius->excludes(pct);
    pct->excludes(radius);
    cmd->add_option("--sample-size", o.sample_size, "Curves sampled for --percentile")
        ->capture_default_str();
}

std::vector<double> parse_epsilons(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size())
            throw ConfigError("bad epsilon '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("epsilon list is empty");
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(out[i] > 0.0)) throw ConfigError("epsilons must be > 0");
        if (i > 0 && !(out[i] < out[i - 1])) throw ConfigError("epsilons must be strictly decreasing");
    }
    return out;
}

Dataset load_dataset(const DatasetOptions& o) {
    Dataset s = o.format == "traj2d" ? parse_trajectories_2d(o.path)
                                     : parse_series_1d(o.path, o.skip_first_field);
    if (s.empty()) throw ParseError(o.path + ": dataset is empty");
    if (o.densify > 0.0) s = densify(s, o.densify);
    return s;
}

double resolve_radius(const RadiusOptions& o, const Dataset& s, std::uint64_t seed, int threads) {
    if (o.radius > 0.0) return o.radius;
    if (o.percentile == 0) throw ConfigError("one of --radius or --percentile is required");
    const double r = percentile_radius(s, o.percentile, o.sample_size, seed, 1e-4, threads);
    if (!(r > 0.0)) throw ConfigError("percentile radius is zero; pass --radius explicitly");
    return r;
}

/// Writes all files or none: contents go to temporaries that are renamed
/// once every write succeeded.
void write_all(const std::vector<std::pair<fs::path, std::string>>& files) {
    std::vector<fs::path> temps;
    try {
        for (const auto& [path, content] : files) {
            fs::path tmp = path;
            tmp += ".tmp";
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw ParseError(path.string() + ": cannot open for writing");
            temps.push_back(tmp);
            out << content;
            if (!out) throw ParseError(path.string() + ": write failed");
        }
        for (std::size_t i = 0; i < files.size(); ++i) fs::rename(temps[i], files[i].first);
    } catch (...) {
        std::error_code ec;
        for (const auto& t : temps) fs::remove(t, ec);
        throw;
    }
}

fs::path with_suffix(const std::string& prefix, const char* suffix) {
    return fs::path(prefix + suffix);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Approximate range search and self-join of curves under the Frechet distance"};
    app.require_subcommand(1);

    DatasetOptions data;
    RadiusOptions radius;
    int k = 2;
    unsigned tables = 1024;
    double tau = 0.0;
    double grid_factor = 4.0;
    std::string epsilons_text = "10,1,0.1";
    std::uint64_t seed = 0;
    int threads = 0;
    std::string slack = "none";
    std::string out_prefix;
    std::string truth_path;
    std::string load_index_path;
    std::string save_index_path;

    auto* self_join_cmd = app.add_subcommand("self-join", "LSH self-similarity join");
    add_dataset_options(self_join_cmd, data);
    add_radius_options(self_join_cmd, radius);
    self_join_cmd->add_option("--k", k, "Grid hashes concatenated per table")
        ->check(CLI::Range(1, 64))
        ->capture_default_str();
    self_join_cmd->add_option("--L", tables, "Hash tables (rounded up to a perfect square)")
        ->check(CLI::Range(1u, 1u << 20))
        ->capture_default_str();
    self_join_cmd->add_option("--tau", tau, "Fraction of lowest-score candidates to verify")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    self_join_cmd->add_option("--grid-factor", grid_factor, "Grid side = factor * d * r")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    self_join_cmd->add_option("--epsilons", epsilons_text, "Simplification epsilons, decreasing")
        ->capture_default_str();
    self_join_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    self_join_cmd->add_option("--threads", threads, "Worker threads (0: all cores)");
    self_join_cmd->add_option("--slack", slack, "Extra LSH radius")
        ->check(CLI::IsMember({"none", "longest-edge"}))
        ->capture_default_str();
    self_join_cmd->add_option("--out", out_prefix,
                              "Output prefix: writes PREFIX.summary.json, PREFIX.queries.jsonl, "
                              "PREFIX.pairs.csv")
        ->required();
    self_join_cmd->add_option("--truth", truth_path, "Ground-truth pairs CSV for metrics");
    self_join_cmd->add_option("--load-index", load_index_path, "Reuse a saved index");
    self_join_cmd->add_option("--save-index", save_index_path, "Save the built index");

    std::string exact_out;
    auto* exact_cmd = app.add_subcommand("exact-join", "Exact self-join (ground truth)");
    add_dataset_options(exact_cmd, data);
    add_radius_options(exact_cmd, radius);
    exact_cmd->add_option("--epsilons", epsilons_text)->capture_default_str();
    exact_cmd->add_option("--seed", seed, "Seed for --percentile sampling")->capture_default_str();
    exact_cmd->add_option("--threads", threads);
    exact_cmd->add_option("--out", exact_out, "Pairs CSV")->required();

    std::string predicted_path, metrics_out;
    auto* metrics_cmd = app.add_subcommand("metrics", "Recall and precision of a pair set");
    metrics_cmd->add_option("--predicted", predicted_path)->required();
    metrics_cmd->add_option("--truth", truth_path)->required();
    metrics_cmd->add_option("--out", metrics_out, "Also write the JSON here");

    double delta = 0.0;
    std::uint64_t trials = 10000;
    std::size_t sample_pairs = 50;
    bool noisy = false;
    std::string collision_out;
    auto* coll_cmd = app.add_subcommand("collision-prob", "Monte-Carlo collision probabilities");
    add_dataset_options(coll_cmd, data);
    auto* delta_opt = coll_cmd->add_option("--delta", delta, "Grid side")->check(CLI::PositiveNumber);
    auto* coll_radius =
        coll_cmd->add_option("--radius", radius.radius, "Derive the grid side from this radius")
            ->check(CLI::PositiveNumber);
    delta_opt->excludes(coll_radius);
    coll_cmd->add_option("--grid-factor", grid_factor)->capture_default_str();
    coll_cmd->add_option("--k", k)->check(CLI::Range(1, 64))->capture_default_str();
    coll_cmd->add_option("--trials", trials)->check(CLI::PositiveNumber)->capture_default_str();
    coll_cmd->add_option("--pairs", sample_pairs, "Random pairs to sample")->capture_default_str();
    coll_cmd->add_option("--seed", seed)->capture_default_str();
    coll_cmd->add_option("--threads", threads);
    coll_cmd->add_flag("--noisy", noisy, "Perturb vertices with uniform noise (d = 1)");
    coll_cmd->add_option("--out", collision_out, "CSV report (default: standard output)");

    std::string file_a, file_b;
    auto* verify_cmd = app.add_subcommand("verify-pair", "Decide d_F(a, b) <= r with the cascade");
    verify_cmd->add_option("a", file_a, "Curve file, one vertex per line")->required();
    verify_cmd->add_option("b", file_b, "Curve file, one vertex per line")->required();
    verify_cmd->add_option("--radius", radius.radius)->required()->check(CLI::NonNegativeNumber);
    verify_cmd->add_option("--epsilons", epsilons_text)->capture_default_str();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (self_join_cmd->parsed()) {
            const Dataset s = load_dataset(data);
            QueryConfig cfg;
            cfg.tau = tau;
            cfg.epsilons = parse_epsilons(epsilons_text);
            cfg.grid_factor = grid_factor;
            cfg.slack = slack == "longest-edge" ? RadiusSlack::LongestEdge : RadiusSlack::None;
            cfg.r = resolve_radius(radius, s, seed, threads);
            cfg.validate();
            const auto params =
                LshParams::make(grid_side(cfg, s), static_cast<unsigned>(k), tables, s.dim, seed);

            std::optional<PairSet> truth;
            if (!truth_path.empty()) truth = read_pairs_csv(truth_path);
            std::optional<LshIndex> index;
            if (!load_index_path.empty()) {
                index = load_index(load_index_path, s);
                if (!(index->params() == params))
                    throw ConfigError("saved index parameters differ from the requested ones");
            }
            const JoinReport report = self_join(s, params, cfg, threads, index ? &*index : nullptr);
            if (!save_index_path.empty()) {
                if (!index) index = build_index(s, params, threads);
                save_index(*index, save_index_path);
            }
            write_all({
                {with_suffix(out_prefix, ".summary.json"), summary_json(report, truth).dump(2) + "\n"},
                {with_suffix(out_prefix, ".queries.jsonl"), queries_jsonl(report)},
                {with_suffix(out_prefix, ".pairs.csv"), pairs_csv(report.reported_pairs())},
            });
            out << "radius " << cfg.r << ", " << report.reported_pairs().size() << " pairs reported\n";
        } else if (exact_cmd->parsed()) {
            const Dataset s = load_dataset(data);
            const auto eps = parse_epsilons(epsilons_text);
            const double r = resolve_radius(radius, s, seed, threads);
            const PairSet pairs = exact_join(s, r, eps, threads);
            write_all({{exact_out, pairs_csv(pairs)}});
            out << "radius " << r << ", " << pairs.size() << " pairs\n";
        } else if (metrics_cmd->parsed()) {
            const auto j = metrics_json(metrics(read_pairs_csv(predicted_path), read_pairs_csv(truth_path)));
            if (!metrics_out.empty()) write_all({{metrics_out, j.dump(2) + "\n"}});
            out << j.dump(2) << "\n";
        } else if (coll_cmd->parsed()) {
            const Dataset s = load_dataset(data);
            if (delta <= 0.0) {
                if (radius.radius <= 0.0) throw ConfigError("one of --delta or --radius is required");
                delta = grid_factor * double(s.dim) * radius.radius;
            }
            if (s.size() < 2) throw ConfigError("need at least two curves");
            std::vector<CurvePair> pairs;
            for (std::size_t i = 0; i < sample_pairs; ++i) {
                const auto pick = sample_without_replacement(s.size(), 2, counter_random(seed, 0x77, i));
                pairs.emplace_back(static_cast<CurveId>(pick[0]), static_cast<CurveId>(pick[1]));
            }
            const auto rows = bounds_report(s, pairs, delta, static_cast<unsigned>(k), trials, seed,
                                            noisy, threads);
            const std::string csv = bounds_csv(rows);
            if (collision_out.empty()) out << csv;
            else write_all({{collision_out, csv}});
            std::size_t failures = 0;
            for (const auto& r : rows)
                failures += (r.estimate.hard_violation || r.estimate.zero_claim_violated) ? 1 : 0;
            if (failures > 0) {
                err << failures << " pair(s) violate a hard collision bound\n";
                return kInternalError;
            }
        } else if (verify_cmd->parsed()) {
            const Curve a = parse_curve_file(file_a);
            const Curve b = parse_curve_file(file_b, a.dim());
            const auto eps = parse_epsilons(epsilons_text);
            const auto o = verify(a, b, radius.radius, eps);
            out << to_string(o.verdict) << " " << o.stage_label() << "\n";
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const IndexLoadError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kOk;
}

}  // namespace fresh::cli
