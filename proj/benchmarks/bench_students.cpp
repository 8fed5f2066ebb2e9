#include <benchmark/benchmark.h>

#include "gax/sas.hpp"
#include "gax/sat.hpp"
#include "gax/synthetic.hpp"

namespace gax {
namespace {

std::vector<double> labels_of(const Dataset& ds) {
  return {ds.labels().data(), ds.labels().data() + ds.labels().size()};
}

void BM_TreeOneFeature(benchmark::State& state) {
  const auto data = gen_f1(state.range(0), 1);
  const auto col = data.data.column(0);
  const auto r = labels_of(data.data);
  for (auto _ : state) benchmark::DoNotOptimize(fit_tree_1d(col, r, 3, 256));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TreeOneFeature)->Arg(10000)->Arg(100000);

void BM_SatFit(benchmark::State& state) {
  const auto data = gen_f1(state.range(0), 1);
  const Dataset x = data.data.without_labels();
  const auto f = labels_of(data.data);
  SatConfig cfg;
  cfg.rounds = 50;
  cfg.bags = 2;
  for (auto _ : state) benchmark::DoNotOptimize(fit_sat(x, f, cfg));
}
BENCHMARK(BM_SatFit)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SasFit(benchmark::State& state) {
  const auto data = gen_f1(state.range(0), 1);
  const Dataset x = data.data.without_labels();
  const auto f = labels_of(data.data);
  for (auto _ : state) benchmark::DoNotOptimize(fit_sas(x, f, SasConfig{}));
}
BENCHMARK(BM_SasFit)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gax
