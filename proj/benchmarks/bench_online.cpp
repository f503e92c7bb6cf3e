#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "rbctl/greedy_rom.hpp"
#include "rbctl/kernel_model.hpp"
#include "rbctl/surrogates.hpp"

using namespace rbctl;

namespace {

Parameter heat_mu() {
  Parameter mu(2);
  mu << 1.37, 0.81;
  return mu;
}

const ProblemInstance& heat_instance(int n_y) {
  static std::map<int, ProblemInstance> cache;
  auto it = cache.find(n_y);
  if (it == cache.end()) it = cache.emplace(n_y, build_heat_family(n_y).build(heat_mu())).first;
  return it->second;
}

// A small heat basis, built once on a 4x4 grid.
const GreedyResult& heat_greedy() {
  static const GreedyResult g = [] {
    const ProblemFamily f = build_heat_family(100);
    GreedyOptions opts;
    opts.tol = 1e-6;
    return greedy_offline(f, sample_grid(f.domain, {4, 4}), opts);
  }();
  return g;
}

void BM_ApplyGramian(benchmark::State& state) {
  const ProblemInstance& inst = heat_instance(static_cast<int>(state.range(0)));
  Vec p = Vec::Random(inst.state_dim());
  for (auto _ : state) benchmark::DoNotOptimize(apply_gramian(inst, p));
}
BENCHMARK(BM_ApplyGramian)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ApplyGramianBatch(benchmark::State& state) {
  const ProblemInstance& inst = heat_instance(100);
  const Mat P = Mat::Random(inst.state_dim(), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(apply_gramian_batch(inst, P));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ApplyGramianBatch)->Arg(1)->Arg(4)->Arg(9)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ExactSolve(benchmark::State& state) {
  const ProblemInstance& inst = heat_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(inst));
}
BENCHMARK(BM_ExactSolve)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RomOnline(benchmark::State& state) {
  const GreedyResult& g = heat_greedy();
  const ProblemInstance& inst = heat_instance(100);
  for (auto _ : state) benchmark::DoNotOptimize(rom_online(inst, g.basis));
  state.counters["N"] = g.basis.size();
}
BENCHMARK(BM_RomOnline)->Unit(benchmark::kMillisecond);

void BM_KernelPredict(benchmark::State& state) {
  static const KernelModel model = fit_kernel(heat_greedy().data, KernelSettings{0.1});
  const Parameter mu = heat_mu();
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(mu));
}
BENCHMARK(BM_KernelPredict);

void BM_SurrogateOnline(benchmark::State& state) {
  static const KernelModel model = fit_kernel(heat_greedy().data, KernelSettings{0.1});
  const ProblemInstance& inst = heat_instance(100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(surrogate_online(inst, heat_mu(), heat_greedy().basis, model, false));
  }
}
BENCHMARK(BM_SurrogateOnline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
