#include <doctest.h>

#include <cmath>
#include <limits>

#include "fresh/curves.hpp"
#include "fresh/frechet.hpp"
#include "test_support.hpp"

using namespace fresh;

TEST_SUITE("curves") {

TEST_CASE("curve construction validates coordinates") {
    CHECK_THROWS_AS(Curve(0, 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(Curve(0, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(Curve::from_values({1.0, std::nan("")}), std::invalid_argument);
    CHECK_THROWS_AS(Curve::from_values({std::numeric_limits<double>::infinity()}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Curve::from_points({{0.0, 0.0}, {1.0}}), std::invalid_argument);

    const auto c = Curve::from_points({{0, 0}, {1, 2}, {3, 4}}, 7);
    CHECK(c.id() == 7);
    CHECK(c.dim() == 2);
    CHECK(c.size() == 3);
    CHECK(c[1][1] == 2.0);
    CHECK(c.back()[0] == 3.0);
}

TEST_CASE("longest edge and bounding box") {
    const auto c = Curve::from_points({{0, 0}, {3, 4}, {3, 5}});
    CHECK(longest_edge(c) == doctest::Approx(5.0));
    CHECK(longest_edge(Curve::from_values({2.0})) == 0.0);
    const auto box = bounding_box(c);
    CHECK(box.lower == Point{0, 0});
    CHECK(box.upper == Point{3, 5});
}

TEST_CASE("simplify keeps endpoints and drops close vertices") {
    const auto p = Curve::from_values({0, 0.1, 0.2, 1.0, 1.05, 2.0});
    const auto s = simplify(p, 0.5);
    CHECK(s == Curve::from_values({0, 1.0, 2.0}));
    CHECK(simplify(p, 0.0) == p);
    CHECK(simplify(p, 100.0) == Curve::from_values({0, 2.0}));
    CHECK(simplify(Curve::from_values({4.0}), 1.0).size() == 1);
    // The last vertex is kept even when it is within mu of the last kept one.
    CHECK(simplify(Curve::from_values({0, 5, 5.1}), 1.0) == Curve::from_values({0, 5, 5.1}));
}

TEST_CASE("simplified curve is within mu of the original") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const auto p = test::random_curve(rng, 1, 12, 2, 5.0);
        const double mu = 0.3 + 0.2 * (i % 5);
        CHECK(decide_continuous(p, simplify(p, mu), mu * (1 + 1e-12)));
    }
}

TEST_CASE("densify subdivides long edges without moving the curve") {
    const auto p = Curve::from_values({0, 1, 4});
    const auto d = densify(p, 1.0);
    CHECK(d == Curve::from_values({0, 1, 2, 3, 4}));
    CHECK(longest_edge(densify(Curve::from_values({0, 1}), 0.3)) <= 0.3);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const auto c = test::random_curve(rng, 1, 8, 2, 10.0);
        const auto dc = densify(c, 0.7);
        CHECK(longest_edge(dc) <= 0.7);
        CHECK(dc.front()[0] == c.front()[0]);
        CHECK(dc.back()[1] == c.back()[1]);
        CHECK(decide_continuous(c, dc, 1e-9));
    }
    CHECK_THROWS_AS(densify(p, 0.0), std::invalid_argument);
}

TEST_CASE("series1d parsing") {
    const auto s = parse_series_1d_text("1, 0.5, 1.5 ,2\n\n2 3e0\t-4\n", true);
    REQUIRE(s.size() == 2);
    CHECK(s.dim == 1);
    CHECK(s[0] == Curve::from_values({0.5, 1.5, 2}));
    CHECK(s[1] == Curve::from_values({3, -4}));
    CHECK(s[1].id() == 1);

    const auto raw = parse_series_1d_text("1,2\r\n+3,4\r\n", false);
    CHECK(raw[1] == Curve::from_values({3, 4}));
}

TEST_CASE("series1d errors name the position") {
    try {
        parse_series_1d_text("1,2\n3,x,4\n", false, "data.txt");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("data.txt:2:3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_series_1d_text("5\n", true), ParseError);
    CHECK_THROWS_AS(parse_series_1d_text("1,nan\n", false), ParseError);
    CHECK_THROWS_AS(parse_series_1d("/nonexistent/file.txt", false), ParseError);
}

TEST_CASE("series1d writer round-trips exactly") {
    std::mt19937_64 rng(3);
    Dataset s{1, {}};
    for (int i = 0; i < 20; ++i) s.curves.push_back(test::random_curve(rng, 1, 9, 1, 1e3));
    s.renumber();
    const auto back = parse_series_1d_text(format_series_1d(s), false);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(back[i] == s[i]);
    CHECK(back.fingerprint() == s.fingerprint());
}

TEST_CASE("trajectory list parsing resolves relative paths") {
    const auto dir = test::scratch_dir("traj");
    std::filesystem::create_directories(dir / "tracks");
    test::write_text(dir / "tracks" / "a.txt", "# header\n0 0\n1 1.5\n");
    test::write_text(dir / "tracks" / "b.txt", "2 2\n");
    test::write_text(dir / "list.txt", "tracks/a.txt\n\ntracks/b.txt\n");
    const auto s = parse_trajectories_2d(dir / "list.txt");
    REQUIRE(s.size() == 2);
    CHECK(s.dim == 2);
    CHECK(s[0] == Curve::from_points({{0, 0}, {1, 1.5}}));
    CHECK(s[1].id() == 1);

    test::write_text(dir / "tracks" / "bad.txt", "0 0\n1\n");
    test::write_text(dir / "bad_list.txt", "tracks/bad.txt\n");
    CHECK_THROWS_AS(parse_trajectories_2d(dir / "bad_list.txt"), ParseError);
    test::write_text(dir / "missing_list.txt", "tracks/none.txt\n");
    CHECK_THROWS_AS(parse_trajectories_2d(dir / "missing_list.txt"), ParseError);
}

TEST_CASE("curve files and fingerprints") {
    const auto dir = test::scratch_dir("curvefile");
    const auto c = Curve::from_points({{0.25, 1}, {2, -3}});
    test::write_text(dir / "c.txt", format_curve(c));
    CHECK(parse_curve_file(dir / "c.txt") == c);
    CHECK_THROWS_AS(parse_curve_file(dir / "c.txt", 1), ParseError);

    Dataset a{1, {Curve::from_values({1, 2}), Curve::from_values({3})}};
    Dataset b{1, {Curve::from_values({1, 2}), Curve::from_values({3.0000001})}};
    Dataset c2{1, {Curve::from_values({1}), Curve::from_values({2, 3})}};
    CHECK(a.fingerprint() != b.fingerprint());
    CHECK(a.fingerprint() != c2.fingerprint());
}

}  // TEST_SUITE
