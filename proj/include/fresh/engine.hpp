#ifndef FRESH_ENGINE_HPP
#define FRESH_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fresh/curves.hpp"
#include "fresh/frechet.hpp"
#include "fresh/lsh.hpp"

namespace fresh {

/// Raised when a configuration is inconsistent (bad radius, tau out of
/// range, index built with a different grid side, ...).
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

enum class RadiusSlack { None, LongestEdge };

struct QueryConfig {
    double r = 1.0;
    double tau = 0.0;
    std::vector<double> epsilons = kDefaultEpsilons;
    RadiusSlack slack = RadiusSlack::None;
    /// delta = grid_factor * d * (r + slack)
    double grid_factor = 4.0;

    void validate() const;
};

/// Grid side for an index answering `cfg` over `s`. With longest-edge slack
/// the LSH radius grows by the longest edge in the dataset.
double grid_side(const QueryConfig& cfg, const Dataset& s);

/// ceil(tau * m) with a guard against products like 0.1 * 30 landing one ulp
/// above an integer.
std::size_t verification_count(double tau, std::size_t m);

struct QueryMatch {
    CurveId id = 0;
    std::uint32_t collisions = 0;
    double score = 0.0;
    bool verified = false;
    Verdict verdict = Verdict::Unknown;
    Stage stage = Stage::LshReject;
    double epsilon = 0.0;

    /// Unverified candidates are reported; verified ones only when Near.
    bool reported() const { return !verified || verdict == Verdict::Near; }
};

struct QueryResult {
    CurveId query = 0;
    /// In (score, id) ascending order, as returned by query_scores.
    std::vector<QueryMatch> candidates;
    double elapsed_ms = 0.0;

    std::vector<CurveId> reported_ids() const;
};

/// LSH candidates for q, with the ceil(tau*m) lowest-score ones verified.
/// `exclude` drops one id (the query itself in a self-join) before selection.
QueryResult range_query(const LshIndex& idx, const Dataset& s, const Curve& q,
                        const QueryConfig& cfg, std::optional<CurveId> exclude = std::nullopt);

using CurvePair = std::pair<CurveId, CurveId>;
/// Sorted, duplicate-free unordered pairs with first < second.
using PairSet = std::vector<CurvePair>;

PairSet normalize_pairs(PairSet pairs);

/// One deduplicated candidate pair of a self-join.
struct PairRecord {
    CurveId a = 0;
    CurveId b = 0;
    std::uint32_t collisions = 0;
    double score = 0.0;
    bool verified = false;
    Verdict verdict = Verdict::Unknown;
    Stage stage = Stage::LshReject;
    double epsilon = 0.0;

    bool reported() const { return !verified || verdict == Verdict::Near; }
};

struct JoinReport {
    LshParams params;
    QueryConfig config;
    std::size_t n = 0;
    std::vector<QueryResult> queries;
    /// Candidate pairs (nonzero score), sorted by (a, b).
    std::vector<PairRecord> pairs;
    double build_ms = 0.0;
    double join_ms = 0.0;

    PairSet reported_pairs() const;
    PairSet candidate_pairs() const;
    std::size_t total_pairs() const { return n < 2 ? 0 : n * (n - 1) / 2; }
};

/// Self-join: one range query per curve (self excluded), merged into
/// unordered pairs. A pair verified by either of its two queries takes that
/// verdict. `index` reuses a prebuilt index; `threads` <= 0 uses the OpenMP
/// default.
JoinReport self_join(const Dataset& s, const LshParams& params, const QueryConfig& cfg,
                     int threads = 0, const LshIndex* index = nullptr);

/// Single-threaded reference for self_join; identical output apart from
/// timings.
JoinReport self_join_serial(const Dataset& s, const LshParams& params, const QueryConfig& cfg,
                            const LshIndex* index = nullptr);

/// All unordered pairs within continuous Frechet distance r, decided by the
/// verify cascade.
PairSet exact_join(const Dataset& s, double r, std::span<const double> epsilons = kDefaultEpsilons,
                   int threads = 0);
PairSet exact_join_serial(const Dataset& s, double r,
                          std::span<const double> epsilons = kDefaultEpsilons);

struct Metrics {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double recall = 1.0;
    double precision = 1.0;
    /// Set when the denominator was zero and the value defaulted to 1.
    bool recall_undefined = false;
    bool precision_undefined = false;
};

Metrics metrics(const PairSet& predicted, const PairSet& truth);

/// Nearest-rank percentile: the ceil(pct/100 * N)-th smallest value.
double nearest_rank_percentile(std::vector<double> values, double pct);

/// Draws min(sample_size, n) curves without replacement and returns the
/// nearest-rank pct-th percentile of their pairwise continuous distances.
double percentile_radius(const Dataset& s, double pct, std::size_t sample_size = 1000,
                         std::uint64_t seed = 0, double rel_tol = 1e-4, int threads = 0);

/// Indices of a seeded sample without replacement, in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    std::uint64_t seed);

}  // namespace fresh

#endif
