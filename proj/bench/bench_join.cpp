// Wall-clock comparison of the serial reference joins against the OpenMP
// versions on a synthetic clustered dataset.
//
//   bench_join [curves] [threads] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "fresh/engine.hpp"
#include "fresh/experiments.hpp"

using namespace fresh;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    ClusteredSpec spec;
    spec.curves = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1000;
    spec.clusters = std::max<std::size_t>(1, spec.curves / 30);
    const int threads = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

    const auto data = make_clustered_dataset(spec);
    QueryConfig cfg;
    cfg.tau = 0.2;
    const auto params = LshParams::make(grid_side(cfg, data), 2, 1024, 1, 1);

    std::printf("curves=%zu threads=%d repeats=%d\n", data.size(), threads, repeats);
    std::printf("%-12s %12s %12s %8s\n", "kernel", "serial_ms", "parallel_ms", "speedup");

    const double build_s = best_of(repeats, [&] { build_index(data, params, 1); });
    const double build_p = best_of(repeats, [&] { build_index(data, params, threads); });
    std::printf("%-12s %12.1f %12.1f %8.2f\n", "build", build_s, build_p, build_s / build_p);

    const auto index = build_index(data, params, threads);
    const double join_s = best_of(repeats, [&] { self_join_serial(data, params, cfg, &index); });
    const double join_p = best_of(repeats, [&] { self_join(data, params, cfg, threads, &index); });
    std::printf("%-12s %12.1f %12.1f %8.2f\n", "self-join", join_s, join_p, join_s / join_p);

    const double exact_s = best_of(repeats, [&] { exact_join_serial(data, cfg.r); });
    const double exact_p = best_of(repeats, [&] { exact_join(data, cfg.r, kDefaultEpsilons, threads); });
    std::printf("%-12s %12.1f %12.1f %8.2f\n", "exact-join", exact_s, exact_p, exact_s / exact_p);
    return 0;
}
