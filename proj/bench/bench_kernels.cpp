#include <benchmark/benchmark.h>

#include <random>

#include "cpred/conjugate.hpp"
#include "cpred/lab.hpp"
#include "cpred/solver.hpp"
#include "cpred/variance.hpp"

using namespace cpred;

namespace {

Dataset random_dataset(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Dataset d;
  d.X.resize(n, p);
  d.y.resize(n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < p; ++c) d.X(r, c) = z(rng);
    d.y(r) = d.X.row(r).sum() + z(rng);
  }
  return d;
}

struct Fixture {
  Dataset data;
  PriorSpec prior;
  PosteriorState state;
  VectorXd x_new;

  Fixture(Index n, Index p)
      : data(random_dataset(n, p, 1)), prior(PriorSpec::isotropic(p)),
        state(fit_posterior(data, prior)), x_new(VectorXd::Ones(p)) {}
};

void BM_SwapAllNaive(benchmark::State& st) {
  const Fixture f(st.range(0), st.range(1));
  for (auto _ : st) benchmark::DoNotOptimize(swap_all_naive(f.data, f.prior, f.x_new));
}

void BM_SwapAllFastSerial(benchmark::State& st) {
  const Fixture f(st.range(0), st.range(1));
  for (auto _ : st) {
    const PosteriorState s = fit_posterior(f.data, f.prior);
    benchmark::DoNotOptimize(swap_all_serial(s, f.data, f.x_new));
  }
}

void BM_SwapAllFastParallel(benchmark::State& st) {
  const Fixture f(st.range(0), st.range(1));
  for (auto _ : st) {
    const PosteriorState s = fit_posterior(f.data, f.prior);
    benchmark::DoNotOptimize(swap_all(s, f.data, f.x_new));
  }
}

template <bool Parallel>
void BM_ApproachI(benchmark::State& st) {
  const Fixture f(200, 6);
  const LinearTerms terms = swap_all(f.state, f.data, f.x_new);
  const std::vector<double> draws =
      draw_sigma2_posterior(f.data, f.prior, 0.1, 0.1, static_cast<std::size_t>(st.range(0)), 3);
  const DivergenceKind k = DivergenceKind::dpd(1.0);
  const ProblemBuilder build = [&](double s2) { return assemble_problem(terms, s2, k, std::sqrt(s2)); };
  for (auto _ : st) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(solve_approach_I(build, draws, CppConfig{}));
    } else {
      benchmark::DoNotOptimize(solve_approach_I_serial(build, draws, CppConfig{}));
    }
  }
}

template <bool Parallel>
void BM_Scenario(benchmark::State& st) {
  SimScenario s;
  s.n_replicates = 4;
  s.n_test = 10;
  s.n_draws = 100;
  for (auto _ : st) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(run_scenario(s));
    } else {
      benchmark::DoNotOptimize(run_scenario_serial(s));
    }
  }
}

}  // namespace

BENCHMARK(BM_SwapAllNaive)->Args({500, 8})->Args({2000, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SwapAllFastSerial)->Args({500, 8})->Args({2000, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SwapAllFastParallel)->Args({500, 8})->Args({2000, 16})->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ApproachI, false)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ApproachI, true)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Scenario, false)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK_TEMPLATE(BM_Scenario, true)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
