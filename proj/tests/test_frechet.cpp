#include <doctest.h>

#include <cmath>

#include "fresh/frechet.hpp"
#include "test_support.hpp"

using namespace fresh;

namespace {

bool witness_ok(const Curve& p, const Curve& q, const VerificationOutcome& o, double r) {
    if (!o.witness) return true;
    return is_valid_witness(p, q, *o.witness, r * (1 + 1e-12) + 1e-12);
}

}  // namespace

TEST_SUITE("frechet") {

TEST_CASE("discrete distance on hand-checked pairs") {
    const auto p = Curve::from_points({{0, 0}, {2, 0}});
    const auto q = Curve::from_points({{0, 0}, {1, 1}, {2, 0}});
    CHECK(discrete_frechet(p, q) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(discrete_frechet_brute(p, q) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    const auto a = Curve::from_values({0, 10});
    const auto b = Curve::from_values({0, 5, 10});
    CHECK(discrete_frechet(a, b) == 5.0);
    CHECK(discrete_frechet_brute(a, b) == 5.0);
    CHECK(discrete_frechet(a, a) == 0.0);
}

TEST_CASE("discrete DP matches brute force") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 300; ++i) {
        const std::size_t dim = 1 + i % 2;
        const auto p = test::random_curve(rng, 1, 6, dim, 4.0);
        const auto q = test::random_curve(rng, 1, 6, dim, 4.0);
        CHECK(std::abs(discrete_frechet(p, q) - discrete_frechet_brute(p, q)) <= 1e-12);
        CHECK(discrete_frechet(p, q) == discrete_frechet(q, p));
    }
    const auto big = Curve::from_values(std::vector<double>(9, 0.0));
    CHECK_THROWS_AS(discrete_frechet_brute(big, big), std::invalid_argument);
    CHECK_THROWS_AS(discrete_frechet(big, Curve::from_points({{0, 0}})), std::invalid_argument);
}

TEST_CASE("continuous decision") {
    const auto a = Curve::from_values({0, 10});
    const auto b = Curve::from_values({0, 5, 10});
    CHECK(decide_continuous(a, b, 0.0));
    CHECK(decide_continuous(b, a, 0.0));
    CHECK_FALSE(decide_continuous(a, Curve::from_values({0, 11}), 0.5));
    CHECK(decide_continuous(a, Curve::from_values({0, 11}), 1.0));
    // Backtracking in 1-D: q overshoots and returns, costing half the excursion.
    const auto c = Curve::from_values({0, 4, 2, 6});
    CHECK(decide_continuous(Curve::from_values({0, 6}), c, 1.0));
    CHECK_FALSE(decide_continuous(Curve::from_values({0, 6}), c, 0.999));
    CHECK_THROWS_AS(decide_continuous(a, b, -1.0), std::invalid_argument);
}

TEST_CASE("continuous estimate brackets the decision") {
    const auto a = Curve::from_values({0, 10});
    const auto b = Curve::from_values({0, 5, 10});
    CHECK(estimate_continuous(a, b) <= 1e-4 * discrete_frechet(a, b));

    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        const auto p = test::random_curve(rng, 1, 7, 2, 5.0);
        const auto q = test::random_curve(rng, 1, 7, 2, 5.0);
        const double est = estimate_continuous(p, q);
        CHECK(est <= discrete_frechet(p, q) + 1e-12);
        CHECK(decide_continuous(p, q, est));
        CHECK_FALSE(decide_continuous(p, q, est * (1 - 2e-4) - 1e-12));
    }
}

TEST_CASE("filter examples") {
    const auto a = Curve::from_values({0, 10});
    const auto b = Curve::from_values({0, 5, 10});

    const auto far_end = endpoints_filter(a, Curve::from_values({0, 12}), 1.0);
    CHECK(far_end.verdict == Verdict::Far);
    CHECK(far_end.stage_label() == "endpoints");
    CHECK(endpoints_filter(a, b, 0.0).verdict == Verdict::Unknown);

    const auto box = bbox_filter(Curve::from_values({0, 8, 0}), Curve::from_values({0, 0}), 1.0);
    CHECK(box.verdict == Verdict::Far);
    CHECK(box.stage_label() == "bbox");

    for (double r : {0.0, 0.5, 3.0}) {
        const auto o = equal_time_upper(Curve::from_values({0, 2}), Curve::from_values({0, 1, 2}), r);
        CHECK(o.verdict == Verdict::Near);
        CHECK(witness_ok(Curve::from_values({0, 2}), Curve::from_values({0, 1, 2}), o, r));
    }

    const auto g = greedy_upper(Curve::from_values({0, 1, 2}), Curve::from_values({0.1, 1.1, 2.1}), 0.2);
    CHECK(g.verdict == Verdict::Near);
    CHECK(g.stage_label() == "greedy");
    CHECK(witness_ok(Curve::from_values({0, 1, 2}), Curve::from_values({0.1, 1.1, 2.1}), g, 0.2));

    CHECK(negative_filter(a, b, 0.1).verdict == Verdict::Unknown);
    const auto neg = negative_filter(Curve::from_values({0, 5, 0, 5}), Curve::from_values({0, 5}), 1.0);
    CHECK(neg.verdict == Verdict::Far);
    CHECK(neg.stage_label() == "negative-filter");
}

TEST_CASE("simplification parameters") {
    const auto s = SimplVerifyParams::make(1.0, 10.0);
    CHECK(s.mu_minus == doctest::Approx(10.0 / 28.0));
    CHECK(s.r_minus == doctest::Approx(1.0 + 10.0 / 14.0));
    CHECK(s.mu_plus == doctest::Approx(10.0 / (28.0 * (1.0 + 10.0 / 3.0))));
    CHECK(s.r_plus == doctest::Approx(3.0 * (1.0 + 10.0 / 14.0) / 13.0));
    CHECK(s.mu_minus == doctest::Approx(0.35714).epsilon(1e-5));
    CHECK(s.r_minus == doctest::Approx(1.71429).epsilon(1e-5));
    CHECK(s.mu_plus == doctest::Approx(0.08242).epsilon(1e-4));
    CHECK(s.r_plus == doctest::Approx(0.39560).epsilon(1e-4));
    CHECK_THROWS_AS(verify_simpl(Curve::from_values({0}), Curve::from_values({0}), 1.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_simpl(Curve::from_values({0}), Curve::from_values({0}), 0.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("cascade stage labels") {
    const auto p = Curve::from_values({0, 3, 1, 4, 1, 5});
    const auto same = verify(p, p, 0.5);
    CHECK(same.verdict == Verdict::Near);
    CHECK(same.stage_label() == "simpl-10");
    CHECK(verify(p, Curve::from_values({9, 5}), 1.0).stage_label() == "endpoints");
    CHECK(stage_label(Stage::Simplification, 0.1) == "simpl-0.1");
    CHECK(stage_label(Stage::LshReject) == "lsh-reject");
    CHECK(stage_label(Stage::FullVerify) == "full-verify");
    CHECK(stage_label(Stage::EqualTime) == "equal-time");

    CHECK_THROWS_AS(verify(p, p, 1.0, std::vector<double>{1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(verify(p, p, 1.0, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(verify(p, p, 1.0, std::vector<double>{-1.0}), std::invalid_argument);
    CHECK(verify(p, p, 0.0).verdict == Verdict::Near);
}

TEST_CASE("every stage agrees with the exact decision") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> factor(0.6, 1.4);
    std::size_t full_verify_hits = 0;
    for (int i = 0; i < 600; ++i) {
        const std::size_t dim = 1 + i % 2;
        auto p = test::random_curve(rng, 1, 9, dim, 6.0);
        auto q = i % 3 == 0 ? test::perturb(rng, p, 0.4) : test::random_curve(rng, 1, 9, dim, 6.0);
        const double r = discrete_frechet(p, q) * factor(rng);
        const bool truth = decide_continuous(p, q, r);

        std::vector<VerificationOutcome> outcomes = {
            endpoints_filter(p, q, r), bbox_filter(p, q, r),  equal_time_upper(p, q, r),
            greedy_upper(p, q, r),     negative_filter(p, q, r), verify_heur(p, q, r),
            verify(p, q, r),
        };
        if (r > 0)
            for (double eps : kDefaultEpsilons) outcomes.push_back(verify_simpl(p, q, r, eps));
        for (const auto& o : outcomes) {
            if (o.verdict == Verdict::Unknown) continue;
            CHECK_MESSAGE((o.verdict == Verdict::Near) == truth, o.stage_label());
            if (o.verdict == Verdict::Near) CHECK(witness_ok(p, q, o, r));
        }
        CHECK(verify_heur(p, q, r).verdict != Verdict::Unknown);
        CHECK(verify(p, q, r).verdict != Verdict::Unknown);

        if (equal_time_upper(p, q, r).verdict == Verdict::Unknown &&
            greedy_upper(p, q, r).verdict == Verdict::Unknown &&
            negative_filter(p, q, r).verdict == Verdict::Unknown) {
            const auto h = verify_heur(p, q, r);
            CHECK(h.stage == Stage::FullVerify);
            CHECK((h.verdict == Verdict::Near) == truth);
            ++full_verify_hits;
        }
    }
    CHECK(full_verify_hits > 0);
}

TEST_CASE("point interpolation") {
    const auto c = Curve::from_points({{0, 0}, {2, 4}, {2, 0}});
    CHECK(point_at(c, 0.5) == Point{1, 2});
    CHECK(point_at(c, 1.25) == Point{2, 3});
    CHECK(point_at(c, 2.0) == Point{2, 0});
}

}  // TEST_SUITE
