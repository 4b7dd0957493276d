#ifndef FRESH_EXPERIMENTS_HPP
#define FRESH_EXPERIMENTS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fresh/curves.hpp"
#include "fresh/engine.hpp"

namespace fresh {

/// Monte-Carlo estimate of the probability that two curves get identical
/// signatures, next to the analytic bounds for the pair. Bounds that do not
/// apply to the estimator that produced the value are NaN.
struct CollisionEstimate {
    std::uint64_t trials = 0;
    std::uint64_t collisions = 0;
    double p_hat = 0.0;
    double std_error = 0.0;

    double discrete_distance = 0.0;
    /// max(|p|, |q|)
    std::size_t m = 0;

    /// max(0, 1 - 2 m d_dF / delta)^k
    double concat_bound;
    /// max(0, 1/4 - d_dF / (2 delta))^m, noisy scheme only
    double noisy_bound;
    /// max(0, 1 - 2 d_dF / delta)^(m k), assumes independent components
    double independent_value;

    /// pHat below the applicable hard bound by more than 3 standard errors.
    bool hard_violation = false;
    /// pHat below independent_value by more than 3 standard errors (diagnostic).
    bool below_independent = false;
    /// The pair is beyond the distance where collisions are impossible
    /// (delta, or 2 delta for the noisy scheme) and yet collided.
    bool zero_claim_violated = false;
};

/// Raw signature equality under `trials` independent draws of k
/// concatenated grids (no tensoring, no key folding).
CollisionEstimate collision_probability(const Curve& p, const Curve& q, double delta, unsigned k,
                                        std::uint64_t trials, std::uint64_t seed,
                                        int threads = 0);

/// As collision_probability with k = 1, but every vertex of both curves is
/// first perturbed by independent uniform noise in [-delta/2, delta/2).
/// Requires d = 1.
CollisionEstimate noisy_collision_probability(const Curve& p, const Curve& q, double delta,
                                              std::uint64_t trials, std::uint64_t seed,
                                              int threads = 0);

struct BoundsRow {
    CurveId a = 0;
    CurveId b = 0;
    CollisionEstimate estimate;
};

std::vector<BoundsRow> bounds_report(const Dataset& s, std::span<const CurvePair> pairs,
                                     double delta, unsigned k, std::uint64_t trials,
                                     std::uint64_t seed, bool noisy = false, int threads = 0);

std::string bounds_csv(const std::vector<BoundsRow>& rows);

/// Score distributions of true- and false-positive candidate pairs, each
/// normalized by its own class total. Bin b covers (b/bins, (b+1)/bins].
struct ScoreHistogram {
    std::size_t bins = 0;
    std::vector<double> tp;
    std::vector<double> fp;
    std::size_t tp_count = 0;
    std::size_t fp_count = 0;
    double tp_mean = 0.0;
    double fp_mean = 0.0;
};

ScoreHistogram score_histogram(const JoinReport& report, const PairSet& truth, std::size_t bins);
std::string histogram_csv(const ScoreHistogram& h);

/// Counts of self-join pairs by how they were decided. Buckets are listed in
/// cascade order and always present; they sum to n(n-1)/2.
struct StageBreakdown {
    std::vector<std::pair<std::string, std::size_t>> buckets;

    std::size_t total() const;
    std::size_t count(const std::string& bucket) const;
};

StageBreakdown stage_breakdown(const JoinReport& report);

// Synthetic data ------------------------------------------------------------

/// 1-D clustered curves: each cluster has a random-walk center; members add
/// independent uniform vertex noise of amplitude `noise`, or `wide_noise` for
/// a `wide_fraction` of members. Clusters are offset by `separation`.
struct ClusteredSpec {
    std::size_t curves = 300;
    std::size_t clusters = 10;
    std::size_t length = 10;
    double step = 1.0;
    double noise = 0.5;
    double wide_noise = 1.5;
    double wide_fraction = 0.3;
    double separation = 50.0;
    std::uint64_t seed = 1;
};

Dataset make_clustered_dataset(const ClusteredSpec& spec);

/// Random 1-D or 2-D curve with vertices uniform in [0, scale)^d.
Curve random_curve(std::size_t length, std::size_t dim, double scale, std::uint64_t seed,
                   std::uint64_t index);

}  // namespace fresh

#endif
