#include <benchmark/benchmark.h>

#include "gax/baselines.hpp"
#include "gax/synthetic.hpp"
#include "gax/teacher.hpp"

namespace gax {
namespace {

void BM_TeacherForward(benchmark::State& state) {
  const TeacherNet net = TeacherNet::random_init({10, 128, 128, 1}, Task::Regression, 1.0, 1);
  const Matrix x = sample_uniform_features(state.range(0), 10, 2);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TeacherForward)->Arg(1000)->Arg(10000);

void BM_TeacherGradient(benchmark::State& state) {
  const TeacherNet net = TeacherNet::random_init({10, 128, 128, 1}, Task::Regression, 1.0, 1);
  const std::vector<double> x(10, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(net.input_gradient(x));
}
BENCHMARK(BM_TeacherGradient);

void BM_ShapPermutation(benchmark::State& state) {
  const TeacherNet net = TeacherNet::random_init({10, 64, 64, 1}, Task::Regression, 1.0, 1);
  const Dataset ds(sample_uniform_features(20, 10, 3), gen_f1(1, 1).data.feature_names(),
                   std::nullopt, Task::Regression);
  ShapConfig cfg;
  cfg.background_size = 32;
  cfg.permutations = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(shap_attributions(net, ds, cfg));
}
BENCHMARK(BM_ShapPermutation)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gax
