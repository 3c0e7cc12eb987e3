// Parallel kernels against the serial reference implementations.
//   ./build/bench/bench_kernels --benchmark_filter=ScoreAll

#include <benchmark/benchmark.h>

#include <map>

#include "geome/kernels.hpp"
#include "geome/train.hpp"
#include "support.hpp"

using namespace geome;

namespace {

constexpr std::size_t kEntities = 4000;
constexpr std::size_t kRelations = 20;

const EmbeddingTable& table(Grade g, std::size_t k) {
  static std::map<std::pair<int, std::size_t>, EmbeddingTable> cache;
  const auto key = std::make_pair(static_cast<int>(g), k);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, testing_support::random_table(g, k, kEntities, kRelations, 1, 0.1)).first;
  }
  return it->second;
}

std::vector<Triple> batch(std::size_t n) {
  std::vector<Triple> b;
  for (std::size_t i = 0; i < n; ++i) {
    b.push_back({static_cast<std::int32_t>((i * 37) % kEntities), static_cast<std::int32_t>(i % kRelations),
                 static_cast<std::int32_t>((i * 101 + 7) % kEntities)});
  }
  return b;
}

void BM_ScoreAllParallel(benchmark::State& state) {
  const auto& t = table(static_cast<Grade>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  std::vector<double> out(kEntities);
  for (auto _ : state) {
    score_all(t, 3, 1, Side::replace_tail, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kEntities));
}

void BM_ScoreAllReference(benchmark::State& state) {
  const auto& t = table(static_cast<Grade>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    auto out = reference::score_all(t, 3, 1, Side::replace_tail);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kEntities));
}

TrainConfig config(Grade g, std::size_t k) {
  TrainConfig c;
  c.grade = g;
  c.dim_k = k;
  return c;
}

void BM_LossParallel(benchmark::State& state) {
  const Grade g = static_cast<Grade>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto& t = table(g, k);
  const auto b = batch(64);
  const auto cfg = config(g, k);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grads(t, b, cfg).loss);
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_LossReference(benchmark::State& state) {
  const Grade g = static_cast<Grade>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto& t = table(g, k);
  const auto b = batch(64);
  const auto cfg = config(g, k);
  for (auto _ : state) benchmark::DoNotOptimize(reference::loss_and_grads(t, b, cfg).loss);
  state.SetItemsProcessed(state.iterations() * 64);
}

void shapes(benchmark::internal::Benchmark* b) {
  for (int g : {1, 2, 3}) b->Args({g, 50});
  b->Args({2, 200});
}

}  // namespace

BENCHMARK(BM_ScoreAllParallel)->Apply(shapes)->UseRealTime();
BENCHMARK(BM_ScoreAllReference)->Apply(shapes)->UseRealTime();
BENCHMARK(BM_LossParallel)->Apply(shapes)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LossReference)->Apply(shapes)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
