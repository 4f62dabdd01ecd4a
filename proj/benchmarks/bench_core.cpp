#include <benchmark/benchmark.h>

#include "adda/adda.hpp"

using namespace adda;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  RngStream rng(seed, 1);
  Matrix m(r, c);
  for (float& v : m.values()) v = static_cast<float>(rng.normal());
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 768, 1), b = random_matrix(768, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 768 * 64));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128);

void BM_ForwardBackward(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const EncoderParams p = init_params(768, 64, 32, RngStream(3, 1));
  const Matrix x = random_matrix(b, 768, 4);
  const Matrix g = random_matrix(b, 32, 5);
  for (auto _ : state) {
    const ForwardResult f = forward(p, x);
    benchmark::DoNotOptimize(backward(p, f.cache, g));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(128);

void BM_InfoNce(benchmark::State& state) {
  RngStream r(6, 1);
  Queue q(512, 32);
  Matrix keys(512, 32);
  for (std::size_t i = 0; i < 512; ++i) {
    std::vector<float> v(32);
    for (float& x : v) x = static_cast<float>(r.normal());
    const auto u = l2_normalize(v);
    std::copy(u.begin(), u.end(), keys.row(i).begin());
  }
  q.enqueue(keys);
  const auto z = std::vector<float>(keys.row(0).begin(), keys.row(0).end());
  const auto pos = std::vector<float>(keys.row(1).begin(), keys.row(1).end());
  for (auto _ : state) benchmark::DoNotOptimize(infonce(z, pos, q, 0.2));
}
BENCHMARK(BM_InfoNce);

void BM_SubbatchSizes(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(subbatch_sizes(p, 128, 1));
}
BENCHMARK(BM_SubbatchSizes)->Arg(3)->Arg(7);

void BM_Augment(benchmark::State& state) {
  const Dataset ds = generate_synthetic(SyntheticParams{.num_classes = 2, .per_class = 1}, 1);
  const Composition comp = make_composition(0, CropSpec{}, 0.8f, 0.2f, 0.5f, 0.5f);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(two_views(ds.images[0], comp, RngStream(i++, 2)));
}
BENCHMARK(BM_Augment);

void BM_TrainEpoch(benchmark::State& state) {
  const Scenario sc = easy_scenario(SyntheticParams{}, 1);
  TrainConfig c;
  c.compositions = sc.compositions;
  for (auto _ : state) {
    state.PauseTiming();
    TrainState st = init_state(c, sc.dataset.sample_dim());
    state.ResumeTiming();
    benchmark::DoNotOptimize(train_epoch(st, sc.dataset, c, Allocation::adaptive()));
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
