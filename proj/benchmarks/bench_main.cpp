#include "mpqkd/channel.hpp"
#include "mpqkd/config.hpp"
#include "mpqkd/pairing.hpp"
#include "mpqkd/pipeline.hpp"
#include "mpqkd/protosim.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

using namespace mpqkd;

static void BM_RoundPovm(benchmark::State& state) {
  ProtocolConfig c;
  c.distance_km = 100.0;
  const int cutoff = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(channel::build_round_povm(c.channel(), cutoff));
}
BENCHMARK(BM_RoundPovm)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

// One point of a distance scan: POVM, gains, decoy bounds and both rates.
static void BM_AnalyticPoint(benchmark::State& state) {
  ProtocolConfig c;
  c.distance_km = 100.0;
  for (auto _ : state) {
    const auto model = pipeline::analytic_model(c);
    benchmark::DoNotOptimize(pipeline::analytic_report(model, c));
  }
}
BENCHMARK(BM_AnalyticPoint)->Unit(benchmark::kMillisecond);

static void BM_Simulate(benchmark::State& state) {
  ProtocolConfig c;
  c.mode = Mode::MonteCarlo;
  c.distance_km = 100.0;
  c.rounds = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(protosim::simulate(c, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

static void BM_PairBox2(benchmark::State& state) {
  const std::size_t n = 1 << 20;
  std::unique_ptr<bool[]> clicks(new bool[n]);
  std::mt19937_64 rng(3);
  std::bernoulli_distribution click(0.01);
  for (std::size_t i = 0; i < n; ++i) clicks[i] = click(rng);
  for (auto _ : state) benchmark::DoNotOptimize(pairing::pair_box2(std::span<const bool>(clicks.get(), n), 2000));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_PairBox2);
BENCHMARK_MAIN();
