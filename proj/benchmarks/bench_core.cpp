#include <benchmark/benchmark.h>

#include "fepi/checks.hpp"
#include "fepi/freeconv.hpp"
#include "fepi/freeentropy.hpp"
#include "fepi/lemma.hpp"
#include "fepi/microstates.hpp"

using namespace fepi;

namespace {

Measure semicircle(double v, std::size_t cells) {
  GridConfig g;
  g.cells = cells;
  return standard_family(Family::semicircle, std::vector<double>{v}, g);
}

void BM_FreeConvolve(benchmark::State& state) {
  const auto cells = static_cast<std::size_t>(state.range(0));
  const auto a = semicircle(1.0, cells);
  const auto b = standard_family(Family::uniform, std::vector<double>{-1.0, 1.0});
  FreeConvolutionConfig cfg;
  cfg.grid.cells = cells;
  for (auto _ : state) benchmark::DoNotOptimize(free_convolve(a, b, cfg));
}
BENCHMARK(BM_FreeConvolve)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_LogEnergy(benchmark::State& state) {
  const auto mu = semicircle(1.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(log_energy(mu));
}
BENCHMARK(BM_LogEnergy)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_RestrictedSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RestrictedSumConfig cfg;
  cfg.pair_samples = 100'000;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        restricted_sum_volume(SetSpec::ball(n, 1.0), SetSpec::ball(n, 0.5), ThetaSpec::inner_product_leq(0.0), cfg));
}
BENCHMARK(BM_RestrictedSum)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_CapFraction(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cap_fraction(n, 0.2, 0.995));
}
BENCHMARK(BM_CapFraction)->Arg(8)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_SampleOmega(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto h = StepFunctionSpec::affine(1.0, 0.0);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_omega(h, k, ++seed, false));
}
BENCHMARK(BM_SampleOmega)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Membership(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto h = StepFunctionSpec::affine(1.0, 0.0);
  const MatrixMicrostate pair[2] = {sample_omega(h, k, 1, false), sample_omega(h, k, 2, false)};
  const auto target = GammaTarget::free_tuple({h.moments(4), h.moments(4)}, 4, 1.0, 1.0);
  const auto words = enumerate_word_targets(target);
  for (auto _ : state) benchmark::DoNotOptimize(microstate_membership(pair, target, words));
}
BENCHMARK(BM_Membership)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
