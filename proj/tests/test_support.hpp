#ifndef FRESH_TEST_SUPPORT_HPP
#define FRESH_TEST_SUPPORT_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "fresh/curves.hpp"

namespace fresh::test {

inline Curve random_curve(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                          std::size_t dim, double scale) {
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_real_distribution<double> coord(0.0, scale);
    std::vector<double> c(len(rng) * dim);
    for (auto& x : c) x = coord(rng);
    return Curve(0, dim, std::move(c));
}

/// p plus uniform noise of the given amplitude on every coordinate.
inline Curve perturb(std::mt19937_64& rng, const Curve& p, double amplitude) {
    std::uniform_real_distribution<double> noise(-amplitude, amplitude);
    std::vector<double> c = p.coords();
    for (auto& x : c) x += noise(rng);
    return Curve(0, p.dim(), std::move(c));
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::path(FRESH_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fresh::test

#endif
