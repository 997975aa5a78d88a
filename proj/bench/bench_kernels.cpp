// Serial vs parallel grid kernels on the QB3 fixture. Run with
// --benchmark_time_unit=ms for readable numbers.

#include <benchmark/benchmark.h>

#include "memliou/effective_dynamics.hpp"
#include "memliou/spectral_longtime.hpp"
#include "memliou/time_domain.hpp"

namespace {

using namespace memliou;

const ModelPipeline& pipeline() {
  static ModelPipeline pipe = build_pipeline(catalog_model("QB3"));
  return pipe;
}

std::vector<Complex> grid(std::size_t n) {
  std::vector<Complex> zs(n);
  for (std::size_t j = 0; j < n; ++j)
    zs[j] = Complex(-3.0 + 6.0 * double(j) / double(n - 1), 0.15);
  return zs;
}

void bm_freq_sweep(benchmark::State& state, Exec exec) {
  const auto& pipe = pipeline();
  const auto zs = grid(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto pts = sweep_frequency_grid(pipe, zs, exec);
    benchmark::DoNotOptimize(pts);
  }
}

void bm_inverse_laplace(benchmark::State& state, Exec exec) {
  const auto& pipe = pipeline();
  const TimeGrid tg = TimeGrid::uniform(0.0, 10.0, 101);
  ContourSpec contour = default_contour(pipe.scale, tg.t_max());
  contour.n_points = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto traj = inverse_laplace_evolve(pipe, contour, tg, exec);
    benchmark::DoNotOptimize(traj);
  }
}

void bm_exact_oracle(benchmark::State& state, Exec exec) {
  const CompositeModel m = catalog_model("QB3");
  const TimeGrid tg = TimeGrid::uniform(0.0, 10.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto traj = exact_reduced_evolution(m, tg, exec);
    benchmark::DoNotOptimize(traj);
  }
}

}  // namespace

BENCHMARK_CAPTURE(bm_freq_sweep, serial, Exec::Serial)->Arg(64)->Arg(256);
BENCHMARK_CAPTURE(bm_freq_sweep, parallel, Exec::Parallel)->Arg(64)->Arg(256);
BENCHMARK_CAPTURE(bm_inverse_laplace, serial, Exec::Serial)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(bm_inverse_laplace, parallel, Exec::Parallel)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(bm_exact_oracle, serial, Exec::Serial)->Arg(512);
BENCHMARK_CAPTURE(bm_exact_oracle, parallel, Exec::Parallel)->Arg(512);

BENCHMARK_MAIN();
