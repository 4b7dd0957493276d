#ifndef FRESH_FRECHET_HPP
#define FRESH_FRECHET_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fresh/curves.hpp"

namespace fresh {

enum class Verdict { Near, Far, Unknown };

/// Which step of the verification cascade reached the decision.
enum class Stage {
    Endpoints,
    BoundingBox,
    Simplification,
    EqualTime,
    Greedy,
    NegativeFilter,
    FullVerify,
    LshReject,
};

/// A position on each curve, as vertex index plus fraction along the next
/// edge. Consecutive steps of a witness move both positions linearly.
struct TraversalStep {
    double p;
    double q;
};

using Traversal = std::vector<TraversalStep>;

struct VerificationOutcome {
    Verdict verdict = Verdict::Unknown;
    Stage stage = Stage::FullVerify;
    /// Set when stage == Simplification.
    double epsilon = 0.0;
    /// Traversal certifying a Near verdict, when the deciding step built one.
    std::optional<Traversal> witness;

    /// "endpoints", "bbox", "simpl-10", "equal-time", ...
    std::string stage_label() const;
};

const char* to_string(Verdict v);
std::string stage_label(Stage s, double epsilon = 0.0);

/// Derived radii and simplification widths for one simplification round.
struct SimplVerifyParams {
    double epsilon;
    double r_prime;     // r / (1 + eps/3)
    double mu_minus;    // r eps / 28
    double mu_plus;     // r eps / (28 (1 + eps/3))
    double r_minus;     // r (1 + eps/14)
    double r_plus;      // r 3 (1 + eps/14) / (3 + eps)

    static SimplVerifyParams make(double r, double epsilon);
};

inline const std::vector<double> kDefaultEpsilons{10.0, 1.0, 0.1};

// Exact distances and decisions ------------------------------------------

/// Discrete Frechet distance by the quadratic dynamic program.
double discrete_frechet(const Curve& p, const Curve& q);

/// Enumerates every monotone vertex traversal. Test oracle; requires
/// |p|*|q| <= 64.
double discrete_frechet_brute(const Curve& p, const Curve& q);

/// Alt-Godau free-space reachability: true iff d_F(p, q) <= r.
bool decide_continuous(const Curve& p, const Curve& q, double r);

/// Continuous Frechet distance by bisection on decide_continuous.
double estimate_continuous(const Curve& p, const Curve& q, double rel_tol = 1e-4);

// Filters and heuristics --------------------------------------------------

VerificationOutcome endpoints_filter(const Curve& p, const Curve& q, double r);
VerificationOutcome bbox_filter(const Curve& p, const Curve& q, double r);
VerificationOutcome equal_time_upper(const Curve& p, const Curve& q, double r);
VerificationOutcome greedy_upper(const Curve& p, const Curve& q, double r);
VerificationOutcome negative_filter(const Curve& p, const Curve& q, double r);

/// Equal-time, greedy, negative filter, then the exact decision. Never
/// returns Unknown.
VerificationOutcome verify_heur(const Curve& p, const Curve& q, double r);

/// One round of simplification-based verification at the given epsilon.
VerificationOutcome verify_simpl(const Curve& p, const Curve& q, double r, double epsilon);

/// The full cascade: endpoints, bounding box, simplification rounds for each
/// epsilon (strictly decreasing), then verify_heur on the original curves.
VerificationOutcome verify(const Curve& p, const Curve& q, double r,
                           std::span<const double> epsilons = kDefaultEpsilons);

/// Checks that `w` is a monotone traversal from (0,0) to the two last
/// vertices whose consecutive steps each stay inside one edge of each curve,
/// and whose pointwise distance never exceeds r.
bool is_valid_witness(const Curve& p, const Curve& q, const Traversal& w, double r);

/// Interpolated point at fractional vertex position `pos`.
Point point_at(const Curve& c, double pos);

}  // namespace fresh

#endif
