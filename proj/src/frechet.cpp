#include "fresh/frechet.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace fresh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_dim(const Curve& p, const Curve& q) {
    if (p.dim() != q.dim()) throw std::invalid_argument("curves differ in dimension");
}

/// Parameter range s in [0,1] where a + s(b - a) lies within distance r of c.
/// lo > hi means empty. Endpoint membership uses the same distance
/// evaluation as the vertex-based procedures, so a vertex pair at distance
/// exactly r is always free.
struct Interval {
    double lo = kInf;
    double hi = -kInf;

    bool empty() const { return lo > hi; }
    bool contains_start() const { return !empty() && lo == 0.0; }
    bool contains_end() const { return !empty() && hi == 1.0; }
};

Interval free_interval(PointView a, PointView b, PointView c, double r) {
    const bool start_free = distance(a, c) <= r;
    const bool end_free = distance(b, c) <= r;
    if (start_free && end_free) return {0.0, 1.0};

    double aa = 0.0, ab = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double v = b[k] - a[k];
        aa += v * v;
        ab += v * (a[k] - c[k]);
    }
    if (aa == 0.0) return start_free ? Interval{0.0, 1.0} : Interval{};

    // Distance to the closest point of the supporting line, measured directly
    // rather than through the expanded quadratic to avoid cancellation.
    const double t0 = -ab / aa;
    double h2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] + t0 * (b[k] - a[k]) - c[k];
        h2 += d * d;
    }
    Interval out;
    if (h2 <= r * r) {
        const double half = std::sqrt((r * r - h2) / aa);
        out.lo = std::max(t0 - half, 0.0);
        out.hi = std::min(t0 + half, 1.0);
    }
    if (start_free) {
        out.lo = 0.0;
        out.hi = std::max(out.hi, 0.0);
    }
    if (end_free) {
        out.hi = 1.0;
        out.lo = std::min(out.lo, 1.0);
    }
    return out;
}

/// Every vertex of `many` within r of the single vertex `one`.
bool all_within(const Curve& many, PointView one, double r) {
    for (std::size_t i = 0; i < many.size(); ++i)
        if (distance(many[i], one) > r) return false;
    return true;
}

std::string format_epsilon(double eps) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), eps);
    (void)ec;
    return std::string(buf.data(), ptr);
}

VerificationOutcome make(Verdict v, Stage s) {
    VerificationOutcome out;
    out.verdict = v;
    out.stage = s;
    return out;
}

void brute_walk(const Curve& p, const Curve& q, std::size_t i, std::size_t j, double worst,
                double& best) {
    worst = std::max(worst, distance(p[i], q[j]));
    if (worst >= best) return;
    if (i + 1 == p.size() && j + 1 == q.size()) {
        best = worst;
        return;
    }
    if (i + 1 < p.size()) brute_walk(p, q, i + 1, j, worst, best);
    if (j + 1 < q.size()) brute_walk(p, q, i, j + 1, worst, best);
    if (i + 1 < p.size() && j + 1 < q.size()) brute_walk(p, q, i + 1, j + 1, worst, best);
}

/// One direction of the negative filter: tries to place every vertex of p on
/// q, monotonically, at the earliest position within distance r.
bool cannot_place_vertices(const Curve& p, const Curve& q, double r) {
    if (distance(p.front(), q.front()) > r) return true;
    if (q.size() == 1) return !all_within(p, q.front(), r);

    std::size_t edge = 0;
    double frac = 0.0;
    for (std::size_t j = 1; j < p.size(); ++j) {
        bool placed = false;
        for (std::size_t e = edge; e + 1 < q.size(); ++e) {
            const Interval free = free_interval(q[e], q[e + 1], p[j], r);
            const double from = (e == edge) ? frac : 0.0;
            if (!free.empty() && free.hi >= from) {
                edge = e;
                frac = std::max(free.lo, from);
                placed = true;
                break;
            }
        }
        if (!placed) return true;
    }
    return false;
}

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Near: return "Near";
        case Verdict::Far: return "Far";
        case Verdict::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string stage_label(Stage s, double epsilon) {
    switch (s) {
        case Stage::Endpoints: return "endpoints";
        case Stage::BoundingBox: return "bbox";
        case Stage::Simplification: return "simpl-" + format_epsilon(epsilon);
        case Stage::EqualTime: return "equal-time";
        case Stage::Greedy: return "greedy";
        case Stage::NegativeFilter: return "negative-filter";
        case Stage::FullVerify: return "full-verify";
        case Stage::LshReject: return "lsh-reject";
    }
    return "unknown";
}

std::string VerificationOutcome::stage_label() const { return fresh::stage_label(stage, epsilon); }

SimplVerifyParams SimplVerifyParams::make(double r, double epsilon) {
    SimplVerifyParams s{};
    s.epsilon = epsilon;
    s.r_prime = r / (1.0 + epsilon / 3.0);
    s.mu_minus = r * epsilon / 28.0;
    s.mu_plus = r * epsilon / (28.0 * (1.0 + epsilon / 3.0));
    s.r_minus = r * (1.0 + epsilon / 14.0);
    s.r_plus = r * (3.0 * (1.0 + epsilon / 14.0) / (3.0 + epsilon));
    return s;
}

Point point_at(const Curve& c, double pos) {
    const std::size_t last = c.size() - 1;
    if (pos <= 0.0) return Point(c.front().begin(), c.front().end());
    if (pos >= static_cast<double>(last)) return Point(c.back().begin(), c.back().end());
    const auto k = static_cast<std::size_t>(std::floor(pos));
    const double f = pos - static_cast<double>(k);
    const auto a = c[k];
    const auto b = c[k + 1];
    Point out(c.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + (b[i] - a[i]) * f;
    return out;
}

double discrete_frechet(const Curve& p, const Curve& q) {
    require_same_dim(p, q);
    const std::size_t n = p.size();
    const std::size_t m = q.size();
    std::vector<double> prev(m), row(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = distance(p[i], q[j]);
            double reach;
            if (i == 0 && j == 0) reach = 0.0;
            else if (i == 0) reach = row[j - 1];
            else if (j == 0) reach = prev[j];
            else reach = std::min({prev[j], row[j - 1], prev[j - 1]});
            row[j] = std::max(d, reach);
        }
        std::swap(prev, row);
    }
    return prev[m - 1];
}

double discrete_frechet_brute(const Curve& p, const Curve& q) {
    require_same_dim(p, q);
    if (p.size() * q.size() > 64)
        throw std::invalid_argument("brute-force discrete Frechet limited to |p|*|q| <= 64");
    double best = kInf;
    brute_walk(p, q, 0, 0, 0.0, best);
    return best;
}

bool decide_continuous(const Curve& p_in, const Curve& q_in, double r) {
    require_same_dim(p_in, q_in);
    if (r < 0.0 || std::isnan(r)) throw std::invalid_argument("radius must be >= 0");
    if (distance(p_in.front(), q_in.front()) > r || distance(p_in.back(), q_in.back()) > r)
        return false;

    // Rows run along the longer curve so the working row has min(|p|,|q|) cells.
    const bool swap = p_in.size() > q_in.size();
    const Curve& p = swap ? q_in : p_in;
    const Curve& q = swap ? p_in : q_in;
    const std::size_t n = p.size();
    const std::size_t m = q.size();
    if (n == 1) return all_within(q, p.front(), r);

    // bottom[i]: reachable part of p-edge i at the current q-vertex.
    std::vector<Interval> bottom(n - 1);
    bool reach = true;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Interval b = free_interval(p[i], p[i + 1], q[0], r);
        if (reach && b.contains_start()) {
            bottom[i] = b;
            reach = b.contains_end();
        } else {
            bottom[i] = Interval{};
            reach = false;
        }
    }

    bool left_column_reach = true;
    Interval left;
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const Interval l0 = free_interval(q[j], q[j + 1], p[0], r);
        if (left_column_reach && l0.contains_start()) {
            left = l0;
            left_column_reach = l0.contains_end();
        } else {
            left = Interval{};
            left_column_reach = false;
        }

        for (std::size_t i = 0; i + 1 < n; ++i) {
            const Interval top = free_interval(p[i], p[i + 1], q[j + 1], r);
            const Interval right = free_interval(q[j], q[j + 1], p[i + 1], r);
            Interval new_top, new_right;
            if (!left.empty()) new_top = top;
            else if (!bottom[i].empty()) new_top = {std::max(bottom[i].lo, top.lo), top.hi};
            if (!bottom[i].empty()) new_right = right;
            else if (!left.empty()) new_right = {std::max(left.lo, right.lo), right.hi};
            bottom[i] = new_top;
            left = new_right;
        }
    }
    return bottom[n - 2].contains_end() || left.contains_end();
}

double estimate_continuous(const Curve& p, const Curve& q, double rel_tol) {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("relative tolerance must be > 0");
    constexpr int kMaxIterations = 40;
    constexpr double kAbsFloor = 1e-12;
    double lo = std::max(distance(p.front(), q.front()), distance(p.back(), q.back()));
    double hi = discrete_frechet(p, q);
    if (decide_continuous(p, q, lo)) return lo;
    for (int it = 0; it < kMaxIterations; ++it) {
        if (hi - lo <= rel_tol * hi + kAbsFloor) break;
        const double mid = 0.5 * (lo + hi);
        if (decide_continuous(p, q, mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

VerificationOutcome endpoints_filter(const Curve& p, const Curve& q, double r) {
    require_same_dim(p, q);
    if (distance(p.front(), q.front()) > r || distance(p.back(), q.back()) > r)
        return make(Verdict::Far, Stage::Endpoints);
    return make(Verdict::Unknown, Stage::Endpoints);
}

VerificationOutcome bbox_filter(const Curve& p, const Curve& q, double r) {
    require_same_dim(p, q);
    const BoundingBox a = bounding_box(p);
    const BoundingBox b = bounding_box(q);
    for (std::size_t c = 0; c < p.dim(); ++c) {
        if (std::abs(a.lower[c] - b.lower[c]) > r || std::abs(a.upper[c] - b.upper[c]) > r)
            return make(Verdict::Far, Stage::BoundingBox);
    }
    return make(Verdict::Unknown, Stage::BoundingBox);
}

VerificationOutcome equal_time_upper(const Curve& p, const Curve& q, double r) {
    require_same_dim(p, q);
    const std::uint64_t np = p.size() - 1;
    const std::uint64_t nq = q.size() - 1;

    // Union of both curves' breakpoints on [0,1], merged by exact integer
    // comparison of i/np against j/nq.
    Traversal steps;
    steps.reserve(np + nq + 1);
    if (np == 0 || nq == 0) {
        const std::uint64_t len = std::max(np, nq);
        for (std::uint64_t k = 0; k <= len; ++k)
            steps.push_back({np == 0 ? 0.0 : double(k), nq == 0 ? 0.0 : double(k)});
    } else {
        std::uint64_t i = 0, j = 0;
        while (i <= np || j <= nq) {
            const std::uint64_t lhs = i * nq;
            const std::uint64_t rhs = j * np;
            if (lhs == rhs) {
                steps.push_back({double(i), double(j)});
                ++i;
                ++j;
            } else if (lhs < rhs) {
                steps.push_back({double(i), double(lhs) / double(np)});
                ++i;
            } else {
                steps.push_back({double(rhs) / double(nq), double(j)});
                ++j;
            }
        }
    }

    for (const auto& s : steps) {
        if (distance(point_at(p, s.p), point_at(q, s.q)) > r)
            return make(Verdict::Unknown, Stage::EqualTime);
    }
    auto out = make(Verdict::Near, Stage::EqualTime);
    out.witness = std::move(steps);
    return out;
}

VerificationOutcome greedy_upper(const Curve& p, const Curve& q, double r) {
    require_same_dim(p, q);
    const std::size_t n = p.size();
    const std::size_t m = q.size();
    std::size_t i = 0, j = 0;
    Traversal steps{{0.0, 0.0}};
    if (distance(p[0], q[0]) > r) return make(Verdict::Unknown, Stage::Greedy);
    while (i + 1 < n || j + 1 < m) {
        // Ties: diagonal, then advance p, then advance q.
        double best = kInf;
        std::size_t bi = i, bj = j;
        auto consider = [&](std::size_t ci, std::size_t cj) {
            const double d = distance(p[ci], q[cj]);
            if (d < best) {
                best = d;
                bi = ci;
                bj = cj;
            }
        };
        if (i + 1 < n && j + 1 < m) consider(i + 1, j + 1);
        if (i + 1 < n) consider(i + 1, j);
        if (j + 1 < m) consider(i, j + 1);
        if (best > r) return make(Verdict::Unknown, Stage::Greedy);
        i = bi;
        j = bj;
        steps.push_back({double(i), double(j)});
    }
    auto out = make(Verdict::Near, Stage::Greedy);
    out.witness = std::move(steps);
    return out;
}

VerificationOutcome negative_filter(const Curve& p, const Curve& q, double r) {
    require_same_dim(p, q);
    if (cannot_place_vertices(p, q, r) || cannot_place_vertices(q, p, r))
        return make(Verdict::Far, Stage::NegativeFilter);
    return make(Verdict::Unknown, Stage::NegativeFilter);
}

VerificationOutcome verify_heur(const Curve& p, const Curve& q, double r) {
    if (auto o = equal_time_upper(p, q, r); o.verdict != Verdict::Unknown) return o;
    if (auto o = greedy_upper(p, q, r); o.verdict != Verdict::Unknown) return o;
    if (auto o = negative_filter(p, q, r); o.verdict != Verdict::Unknown) return o;
    return make(decide_continuous(p, q, r) ? Verdict::Near : Verdict::Far, Stage::FullVerify);
}

VerificationOutcome verify_simpl(const Curve& p, const Curve& q, double r, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(r > 0.0)) throw std::invalid_argument("radius must be > 0");
    const auto params = SimplVerifyParams::make(r, epsilon);
    VerificationOutcome out = make(Verdict::Unknown, Stage::Simplification);
    out.epsilon = epsilon;

    const auto coarse =
        verify_heur(simplify(p, params.mu_minus), simplify(q, params.mu_minus), params.r_minus);
    if (coarse.verdict == Verdict::Far) {
        out.verdict = Verdict::Far;
        return out;
    }
    const auto fine =
        verify_heur(simplify(p, params.mu_plus), simplify(q, params.mu_plus), params.r_plus);
    if (fine.verdict == Verdict::Near) out.verdict = Verdict::Near;
    return out;
}

VerificationOutcome verify(const Curve& p, const Curve& q, double r,
                           std::span<const double> epsilons) {
    if (epsilons.empty()) throw std::invalid_argument("epsilon list is empty");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw std::invalid_argument("epsilons must be > 0");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("epsilons must be strictly decreasing");
    }
    if (r < 0.0 || std::isnan(r)) throw std::invalid_argument("radius must be >= 0");

    if (auto o = endpoints_filter(p, q, r); o.verdict != Verdict::Unknown) return o;
    if (auto o = bbox_filter(p, q, r); o.verdict != Verdict::Unknown) return o;
    if (r > 0.0) {
        for (double eps : epsilons)
            if (auto o = verify_simpl(p, q, r, eps); o.verdict != Verdict::Unknown) return o;
    }
    return verify_heur(p, q, r);
}

bool is_valid_witness(const Curve& p, const Curve& q, const Traversal& w, double r) {
    if (w.empty()) return false;
    const double last_p = double(p.size() - 1);
    const double last_q = double(q.size() - 1);
    if (w.front().p != 0.0 || w.front().q != 0.0) return false;
    if (w.back().p != last_p || w.back().q != last_q) return false;

    auto same_edge = [](double a, double b, double last) {
        if (a == b) return true;
        double e = std::floor(a);
        if (e >= last) e = last - 1.0;
        return b <= e + 1.0;
    };
    for (std::size_t k = 0; k < w.size(); ++k) {
        const auto& s = w[k];
        if (s.p < 0.0 || s.q < 0.0 || s.p > last_p || s.q > last_q) return false;
        if (distance(point_at(p, s.p), point_at(q, s.q)) > r) return false;
        if (k == 0) continue;
        const auto& prev = w[k - 1];
        if (s.p < prev.p || s.q < prev.q) return false;
        if (!same_edge(prev.p, s.p, last_p) || !same_edge(prev.q, s.q, last_q)) return false;
    }
    return true;
}

}  // namespace fresh
