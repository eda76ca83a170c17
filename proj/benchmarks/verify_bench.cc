#include <benchmark/benchmark.h>

#include "eev/interval.h"
#include "eev/queries.h"
#include "eev/solver.h"
#include "eev/synthetic.h"
#include "eev/verify.h"

namespace {

eev::EENetwork BenchNet(std::size_t width) {
  eev::SyntheticSpec spec;
  spec.input_dim = 3;
  spec.num_classes = 4;
  spec.hidden_widths = {width, width, width};
  spec.exit_after = {0, 1};
  spec.thresholds = {0.8};
  spec.weight_scale = 3.0;
  return eev::gen_synthetic(7, spec);
}

void BM_Propagate(benchmark::State& state) {
  const eev::EENetwork net = BenchNet(static_cast<std::size_t>(state.range(0)));
  const eev::BoxDomain box = eev::ball(eev::Vector::Constant(3, 0.5), 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eev::propagate(net, box));
  }
}
BENCHMARK(BM_Propagate)->Arg(8)->Arg(16)->Arg(32);

void BM_SolveRunnerUpLast(benchmark::State& state) {
  const eev::EENetwork net = BenchNet(8);
  const eev::QuerySpec q = eev::make_query(net, eev::Vector::Constant(3, 0.5), 0.01 * state.range(0));
  const eev::Conjunction conj = eev::runner_up_query(q, eev::ExitId::Last(), (q.winner + 1) % 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eev::solve(net, q.box(), conj));
  }
}
BENCHMARK(BM_SolveRunnerUpLast)->Arg(1)->Arg(5)->Arg(10);

// Arg: algorithm index in Algorithm order.
void BM_Verify(benchmark::State& state) {
  const eev::EENetwork net = BenchNet(8);
  const auto alg = static_cast<eev::Algorithm>(state.range(0));
  const eev::QuerySpec q = eev::make_query(net, eev::Vector::Constant(3, 0.5), 0.02);
  std::size_t subproblems = 0;
  for (auto _ : state) {
    const eev::RunRecord rec = eev::verify(alg, q);
    subproblems = rec.subproblems_total;
    benchmark::DoNotOptimize(rec.verdict.status);
  }
  state.SetLabel(eev::to_string(alg));
  state.counters["subproblems"] = static_cast<double>(subproblems);
}
BENCHMARK(BM_Verify)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
