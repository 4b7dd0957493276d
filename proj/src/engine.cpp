#include "fresh/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <omp.h>

namespace fresh {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

int resolve_threads(int threads) { return threads <= 0 ? omp_get_max_threads() : threads; }

double dataset_longest_edge(const Dataset& s) {
    double iota = 0.0;
    for (const auto& c : s.curves) iota = std::max(iota, longest_edge(c));
    return iota;
}

void check_index(const LshIndex& idx, const Dataset& s, const QueryConfig& cfg) {
    if (idx.size() != s.size() || idx.params().dim != s.dim)
        throw ConfigError("index does not match the dataset");
    const double expected = grid_side(cfg, s);
    const double actual = idx.params().delta;
    if (std::abs(actual - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
        throw ConfigError("index grid side " + std::to_string(actual) +
                          " does not match the configured " + std::to_string(expected));
}

/// Merges per-query candidates into unordered pairs; queries are visited in
/// id order so the result does not depend on scheduling.
std::vector<PairRecord> merge_pairs(const std::vector<QueryResult>& queries) {
    std::vector<PairRecord> all;
    for (const auto& qr : queries) {
        for (const auto& m : qr.candidates) {
            PairRecord rec;
            rec.a = std::min(qr.query, m.id);
            rec.b = std::max(qr.query, m.id);
            rec.collisions = m.collisions;
            rec.score = m.score;
            rec.verified = m.verified;
            rec.verdict = m.verdict;
            rec.stage = m.stage;
            rec.epsilon = m.epsilon;
            all.push_back(rec);
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const PairRecord& x, const PairRecord& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    std::vector<PairRecord> merged;
    for (const auto& rec : all) {
        if (!merged.empty() && merged.back().a == rec.a && merged.back().b == rec.b) {
            if (!merged.back().verified && rec.verified) merged.back() = rec;
            continue;
        }
        merged.push_back(rec);
    }
    return merged;
}

template <typename Loop>
JoinReport run_self_join(const Dataset& s, const LshParams& params, const QueryConfig& cfg,
                         const LshIndex* index, int build_threads, Loop&& loop) {
    cfg.validate();
    JoinReport report;
    report.config = cfg;
    report.n = s.size();
    if (s.empty()) {
        report.params = params;
        return report;
    }

    const auto build_start = Clock::now();
    std::optional<LshIndex> owned;
    if (index == nullptr) {
        owned.emplace(build_index(s, params, build_threads));
        index = &*owned;
    }
    report.build_ms = ms_since(build_start);
    report.params = index->params();
    check_index(*index, s, cfg);

    const auto join_start = Clock::now();
    report.queries.resize(s.size());
    loop(s.size(), [&](std::size_t qi) {
        report.queries[qi] = range_query(*index, s, s[qi], cfg, static_cast<CurveId>(qi));
    });
    report.pairs = merge_pairs(report.queries);
    report.join_ms = ms_since(join_start);
    return report;
}

}  // namespace

void QueryConfig::validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("radius must be > 0");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
    if (!(grid_factor > 0.0)) throw ConfigError("grid factor must be > 0");
    if (epsilons.empty()) throw ConfigError("epsilon list is empty");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw ConfigError("epsilons must be > 0");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw ConfigError("epsilons must be strictly decreasing");
    }
}

double grid_side(const QueryConfig& cfg, const Dataset& s) {
    const double iota = cfg.slack == RadiusSlack::LongestEdge ? dataset_longest_edge(s) : 0.0;
    return cfg.grid_factor * static_cast<double>(s.dim) * (cfg.r + iota);
}

std::size_t verification_count(double tau, std::size_t m) {
    const double v = tau * static_cast<double>(m);
    const auto count = static_cast<std::size_t>(std::ceil(v - 1e-9 * std::max(1.0, v)));
    return std::min(count, m);
}

std::vector<CurveId> QueryResult::reported_ids() const {
    std::vector<CurveId> out;
    for (const auto& m : candidates)
        if (m.reported()) out.push_back(m.id);
    std::sort(out.begin(), out.end());
    return out;
}

QueryResult range_query(const LshIndex& idx, const Dataset& s, const Curve& q,
                        const QueryConfig& cfg, std::optional<CurveId> exclude) {
    const auto start = Clock::now();
    QueryResult out;
    out.query = exclude.value_or(q.id());
    for (const auto& c : query_scores(idx, q)) {
        if (exclude && c.id == *exclude) continue;
        QueryMatch m;
        m.id = c.id;
        m.collisions = c.collisions;
        m.score = c.score;
        out.candidates.push_back(m);
    }
    const std::size_t to_verify = verification_count(cfg.tau, out.candidates.size());
    for (std::size_t i = 0; i < to_verify; ++i) {
        auto& m = out.candidates[i];
        const auto o = verify(q, s[m.id], cfg.r, cfg.epsilons);
        m.verified = true;
        m.verdict = o.verdict;
        m.stage = o.stage;
        m.epsilon = o.epsilon;
    }
    out.elapsed_ms = ms_since(start);
    return out;
}

PairSet normalize_pairs(PairSet pairs) {
    for (auto& p : pairs)
        if (p.first > p.second) std::swap(p.first, p.second);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

PairSet JoinReport::reported_pairs() const {
    PairSet out;
    for (const auto& p : pairs)
        if (p.reported()) out.emplace_back(p.a, p.b);
    return out;
}

PairSet JoinReport::candidate_pairs() const {
    PairSet out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.emplace_back(p.a, p.b);
    return out;
}

JoinReport self_join(const Dataset& s, const LshParams& params, const QueryConfig& cfg,
                     int threads, const LshIndex* index) {
    threads = resolve_threads(threads);
    return run_self_join(s, params, cfg, index, threads, [threads](std::size_t n, auto&& body) {
        const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    });
}

JoinReport self_join_serial(const Dataset& s, const LshParams& params, const QueryConfig& cfg,
                            const LshIndex* index) {
    return run_self_join(s, params, cfg, index, 1, [](std::size_t n, auto&& body) {
        for (std::size_t i = 0; i < n; ++i) body(i);
    });
}

PairSet exact_join(const Dataset& s, double r, std::span<const double> epsilons, int threads) {
    if (!(r > 0.0)) throw ConfigError("radius must be > 0");
    threads = resolve_threads(threads);
    const auto n = static_cast<std::int64_t>(s.size());
    std::vector<PairSet> per_row(s.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t a = 0; a < n; ++a) {
        for (std::int64_t b = a + 1; b < n; ++b) {
            if (verify(s[a], s[b], r, epsilons).verdict == Verdict::Near)
                per_row[a].emplace_back(static_cast<CurveId>(a), static_cast<CurveId>(b));
        }
    }
    PairSet out;
    for (const auto& row : per_row) out.insert(out.end(), row.begin(), row.end());
    return out;
}

PairSet exact_join_serial(const Dataset& s, double r, std::span<const double> epsilons) {
    if (!(r > 0.0)) throw ConfigError("radius must be > 0");
    PairSet out;
    for (std::size_t a = 0; a < s.size(); ++a)
        for (std::size_t b = a + 1; b < s.size(); ++b)
            if (verify(s[a], s[b], r, epsilons).verdict == Verdict::Near)
                out.emplace_back(static_cast<CurveId>(a), static_cast<CurveId>(b));
    return out;
}

Metrics metrics(const PairSet& predicted_in, const PairSet& truth_in) {
    const PairSet predicted = normalize_pairs(predicted_in);
    const PairSet truth = normalize_pairs(truth_in);
    PairSet common;
    std::set_intersection(predicted.begin(), predicted.end(), truth.begin(), truth.end(),
                          std::back_inserter(common));
    Metrics m;
    m.tp = common.size();
    m.fp = predicted.size() - m.tp;
    m.fn = truth.size() - m.tp;
    if (m.tp + m.fn == 0) m.recall_undefined = true;
    else m.recall = double(m.tp) / double(m.tp + m.fn);
    if (m.tp + m.fp == 0) m.precision_undefined = true;
    else m.precision = double(m.tp) / double(m.tp + m.fp);
    return m;
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty set");
    if (!(pct > 0.0 && pct < 100.0)) throw std::invalid_argument("percentile must lie in (0, 100)");
    std::sort(values.begin(), values.end());
    const double exact = pct / 100.0 * static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    std::uint64_t seed) {
    count = std::min(count, n);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t bound = n - i;
        const auto x = counter_random(seed, grid_stream(0x5a, 0, 0), i);
        const auto pick = static_cast<std::size_t>(
            (static_cast<unsigned __int128>(x) * bound) >> 64);
        std::swap(perm[i], perm[i + pick]);
    }
    perm.resize(count);
    return perm;
}

double percentile_radius(const Dataset& s, double pct, std::size_t sample_size,
                         std::uint64_t seed, double rel_tol, int threads) {
    if (s.size() < 2) throw ConfigError("percentile radius needs at least two curves");
    if (sample_size < 2) throw ConfigError("sample size must be >= 2");
    threads = resolve_threads(threads);
    const auto sample = sample_without_replacement(s.size(), sample_size, seed);
    const std::size_t k = sample.size();
    std::vector<double> distances(k * (k - 1) / 2);
    const auto rows = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t ai = 0; ai < rows; ++ai) {
        const auto a = static_cast<std::size_t>(ai);
        // Row a starts after the a previous rows of decreasing length.
        std::size_t slot = a * (2 * k - a - 1) / 2;
        for (std::size_t b = a + 1; b < k; ++b)
            distances[slot++] = estimate_continuous(s[sample[a]], s[sample[b]], rel_tol);
    }
    return nearest_rank_percentile(std::move(distances), pct);
}

}  // namespace fresh
