#include "fresh/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <omp.h>

#include "fresh/frechet.hpp"
#include "fresh/lsh.hpp"

namespace fresh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kTrialGroup = 2;
constexpr std::uint64_t kNoiseGroup = 3;
constexpr std::uint64_t kSyntheticGroup = 4;

int resolve_threads(int threads) { return threads <= 0 ? omp_get_max_threads() : threads; }

void finish(CollisionEstimate& e) {
    e.p_hat = double(e.collisions) / double(e.trials);
    e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / double(e.trials));
}

Curve add_noise(const Curve& c, double delta, std::uint64_t seed, std::uint64_t trial,
                std::uint64_t which) {
    std::vector<double> coords = c.coords();
    for (std::size_t i = 0; i < coords.size(); ++i)
        coords[i] += delta * (counter_uniform(seed, grid_stream(kNoiseGroup, trial, which), i) - 0.5);
    return Curve(c.id(), c.dim(), std::move(coords));
}

std::string fmt(double x) {
    std::ostringstream ss;
    ss.precision(17);
    ss << x;
    return ss.str();
}

}  // namespace

CollisionEstimate collision_probability(const Curve& p, const Curve& q, double delta, unsigned k,
                                        std::uint64_t trials, std::uint64_t seed, int threads) {
    if (p.dim() != q.dim()) throw std::invalid_argument("curves differ in dimension");
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    if (!(delta > 0.0) || k < 1) throw std::invalid_argument("invalid grid parameters");
    threads = resolve_threads(threads);

    CollisionEstimate e;
    e.trials = trials;
    e.discrete_distance = discrete_frechet(p, q);
    e.m = std::max(p.size(), q.size());
    const double ddf = e.discrete_distance;
    e.concat_bound = std::pow(std::max(0.0, 1.0 - 2.0 * double(e.m) * ddf / delta), double(k));
    e.noisy_bound = kNaN;
    e.independent_value = std::pow(std::max(0.0, 1.0 - 2.0 * ddf / delta), double(e.m * k));

    std::uint64_t hits = 0;
    const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static) num_threads(threads) reduction(+ : hits)
    for (std::int64_t t = 0; t < count; ++t) {
        std::vector<GridHash> grids;
        grids.reserve(k);
        for (unsigned c = 0; c < k; ++c)
            grids.push_back(GridHash::draw(delta, p.dim(), seed,
                                           grid_stream(kTrialGroup, std::uint64_t(t), c)));
        if (snap_signature(grids, p) == snap_signature(grids, q)) ++hits;
    }
    e.collisions = hits;
    finish(e);
    e.hard_violation = e.p_hat < e.concat_bound - 3.0 * e.std_error;
    e.below_independent = e.p_hat < e.independent_value - 3.0 * e.std_error;
    // Snapping moves each coordinate by at most delta/2, so equal
    // signatures imply d_dF <= delta * sqrt(d).
    e.zero_claim_violated = ddf > delta * std::sqrt(double(p.dim())) && hits > 0;
    return e;
}

CollisionEstimate noisy_collision_probability(const Curve& p, const Curve& q, double delta,
                                              std::uint64_t trials, std::uint64_t seed,
                                              int threads) {
    if (p.dim() != 1 || q.dim() != 1)
        throw std::invalid_argument("noisy collision experiment requires d = 1");
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    if (!(delta > 0.0)) throw std::invalid_argument("invalid grid parameters");
    threads = resolve_threads(threads);

    CollisionEstimate e;
    e.trials = trials;
    e.discrete_distance = discrete_frechet(p, q);
    e.m = std::max(p.size(), q.size());
    const double ddf = e.discrete_distance;
    e.concat_bound = kNaN;
    e.noisy_bound = std::pow(std::max(0.0, 0.25 - ddf / (2.0 * delta)), double(e.m));
    e.independent_value = kNaN;

    std::uint64_t hits = 0;
    const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static) num_threads(threads) reduction(+ : hits)
    for (std::int64_t t = 0; t < count; ++t) {
        const auto trial = static_cast<std::uint64_t>(t);
        const GridHash g = GridHash::draw(delta, 1, seed, grid_stream(kTrialGroup, trial, 0));
        const std::span<const GridHash> grids(&g, 1);
        if (snap_signature(grids, add_noise(p, delta, seed, trial, 0)) ==
            snap_signature(grids, add_noise(q, delta, seed, trial, 1)))
            ++hits;
    }
    e.collisions = hits;
    finish(e);
    e.hard_violation = e.p_hat < e.noisy_bound - 3.0 * e.std_error;
    e.zero_claim_violated = ddf > 2.0 * delta && hits > 0;
    return e;
}

std::vector<BoundsRow> bounds_report(const Dataset& s, std::span<const CurvePair> pairs,
                                     double delta, unsigned k, std::uint64_t trials,
                                     std::uint64_t seed, bool noisy, int threads) {
    std::vector<BoundsRow> rows;
    rows.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [a, b] = pairs[i];
        // Each pair gets its own seed so rows do not share grid draws.
        const std::uint64_t pair_seed = counter_random(seed, grid_stream(kTrialGroup, 0xffff, 0), i);
        BoundsRow row{a, b, {}};
        row.estimate = noisy ? noisy_collision_probability(s[a], s[b], delta, trials, pair_seed, threads)
                             : collision_probability(s[a], s[b], delta, k, trials, pair_seed, threads);
        rows.push_back(row);
    }
    return rows;
}

std::string bounds_csv(const std::vector<BoundsRow>& rows) {
    std::string out =
        "a,b,m,d_dF,trials,collisions,p_hat,stderr,concat_bound,noisy_bound,independent_value,"
        "hard_violation,below_independent,zero_claim_violated\n";
    for (const auto& r : rows) {
        const auto& e = r.estimate;
        out += std::to_string(r.a) + "," + std::to_string(r.b) + "," + std::to_string(e.m) + "," +
               fmt(e.discrete_distance) + "," + std::to_string(e.trials) + "," +
               std::to_string(e.collisions) + "," + fmt(e.p_hat) + "," + fmt(e.std_error) + "," +
               (std::isnan(e.concat_bound) ? "" : fmt(e.concat_bound)) + "," +
               (std::isnan(e.noisy_bound) ? "" : fmt(e.noisy_bound)) + "," +
               (std::isnan(e.independent_value) ? "" : fmt(e.independent_value)) + "," +
               (e.hard_violation ? "1" : "0") + "," + (e.below_independent ? "1" : "0") + "," +
               (e.zero_claim_violated ? "1" : "0") + "\n";
    }
    return out;
}

ScoreHistogram score_histogram(const JoinReport& report, const PairSet& truth_in, std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
    const PairSet truth = normalize_pairs(truth_in);
    ScoreHistogram h;
    h.bins = bins;
    h.tp.assign(bins, 0.0);
    h.fp.assign(bins, 0.0);
    double tp_sum = 0.0, fp_sum = 0.0;
    for (const auto& p : report.pairs) {
        const auto bin = std::min(
            bins - 1, static_cast<std::size_t>(std::max(0.0, std::ceil(p.score * double(bins)) - 1.0)));
        if (std::binary_search(truth.begin(), truth.end(), CurvePair{p.a, p.b})) {
            h.tp[bin] += 1.0;
            ++h.tp_count;
            tp_sum += p.score;
        } else {
            h.fp[bin] += 1.0;
            ++h.fp_count;
            fp_sum += p.score;
        }
    }
    if (h.tp_count > 0) {
        for (auto& v : h.tp) v /= double(h.tp_count);
        h.tp_mean = tp_sum / double(h.tp_count);
    }
    if (h.fp_count > 0) {
        for (auto& v : h.fp) v /= double(h.fp_count);
        h.fp_mean = fp_sum / double(h.fp_count);
    }
    return h;
}

std::string histogram_csv(const ScoreHistogram& h) {
    std::string out = "bin_low,bin_high,tp_fraction,fp_fraction\n";
    for (std::size_t b = 0; b < h.bins; ++b) {
        out += fmt(double(b) / double(h.bins)) + "," + fmt(double(b + 1) / double(h.bins)) + "," +
               fmt(h.tp[b]) + "," + fmt(h.fp[b]) + "\n";
    }
    return out;
}

std::size_t StageBreakdown::total() const {
    std::size_t t = 0;
    for (const auto& [name, c] : buckets) t += c;
    return t;
}

std::size_t StageBreakdown::count(const std::string& bucket) const {
    for (const auto& [name, c] : buckets)
        if (name == bucket) return c;
    return 0;
}

StageBreakdown stage_breakdown(const JoinReport& report) {
    StageBreakdown out;
    auto add = [&out](std::string name) { out.buckets.emplace_back(std::move(name), 0); };
    add("lsh-reject");
    add("unverified-positive");
    add("endpoints-negative");
    add("bbox-negative");
    for (double eps : report.config.epsilons) {
        add(stage_label(Stage::Simplification, eps) + "-positive");
        add(stage_label(Stage::Simplification, eps) + "-negative");
    }
    add("equal-time-positive");
    add("greedy-positive");
    add("negative-filter-negative");
    add("full-verify-positive");
    add("full-verify-negative");

    auto bump = [&out](const std::string& name) {
        for (auto& [bucket, c] : out.buckets)
            if (bucket == name) {
                ++c;
                return;
            }
        out.buckets.emplace_back(name, 1);
    };
    for (const auto& p : report.pairs) {
        if (!p.verified) {
            bump("unverified-positive");
            continue;
        }
        bump(stage_label(p.stage, p.epsilon) +
             (p.verdict == Verdict::Near ? "-positive" : "-negative"));
    }
    out.buckets.front().second = report.total_pairs() - report.pairs.size();
    return out;
}

Dataset make_clustered_dataset(const ClusteredSpec& spec) {
    if (spec.clusters == 0 || spec.length == 0) throw std::invalid_argument("empty cluster spec");
    auto uniform = [&](std::uint64_t slot, std::uint64_t concat, std::uint64_t counter) {
        return counter_uniform(spec.seed, grid_stream(kSyntheticGroup, slot, concat), counter);
    };
    std::vector<std::vector<double>> centers(spec.clusters);
    for (std::size_t c = 0; c < spec.clusters; ++c) {
        double x = double(c) * spec.separation;
        for (std::size_t i = 0; i < spec.length; ++i) {
            x += spec.step * (2.0 * uniform(c, 0, i) - 1.0);
            centers[c].push_back(x);
        }
    }
    Dataset out{1, {}};
    for (std::size_t i = 0; i < spec.curves; ++i) {
        const std::size_t c = i % spec.clusters;
        const bool wide = uniform(i, 1, 0) < spec.wide_fraction;
        const double amp = wide ? spec.wide_noise : spec.noise;
        std::vector<double> values(spec.length);
        for (std::size_t v = 0; v < spec.length; ++v)
            values[v] = centers[c][v] + amp * (2.0 * uniform(i, 2, v) - 1.0);
        out.curves.push_back(Curve::from_values(std::move(values), static_cast<CurveId>(i)));
    }
    return out;
}

Curve random_curve(std::size_t length, std::size_t dim, double scale, std::uint64_t seed,
                   std::uint64_t index) {
    std::vector<double> coords(length * dim);
    for (std::size_t i = 0; i < coords.size(); ++i)
        coords[i] = scale * counter_uniform(seed, grid_stream(kSyntheticGroup, index, 3), i);
    return Curve(static_cast<CurveId>(index), dim, std::move(coords));
}

}  // namespace fresh
