#include <benchmark/benchmark.h>

#include "eventcast/aggregation.hpp"
#include "eventcast/rng.hpp"

using namespace eventcast;

namespace {

std::vector<ExpertPrediction> random_predictions(std::size_t n,
                                                 std::size_t objects,
                                                 std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<ExpertPrediction> preds;
  preds.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    preds.push_back({"expert_" + std::to_string(i),
                     "object_" + std::to_string(rng.next_below(objects)),
                     rng.next_in(0.05, 0.95)});
  return preds;
}

}  // namespace

static void BM_MajorityVote(benchmark::State& state) {
  auto preds = random_predictions(static_cast<std::size_t>(state.range(0)), 16, 1);
  for (auto _ : state) {
    auto forecast = majority_vote(preds);
    benchmark::DoNotOptimize(forecast);
  }
}
BENCHMARK(BM_MajorityVote)->Arg(8)->Arg(64)->Arg(512);

static void BM_WeightedBestOfN(benchmark::State& state) {
  auto preds = random_predictions(static_cast<std::size_t>(state.range(0)), 16, 2);
  for (auto _ : state) {
    auto forecast = weighted_best_of_n(preds);
    benchmark::DoNotOptimize(forecast);
  }
}
BENCHMARK(BM_WeightedBestOfN)->Arg(8)->Arg(64)->Arg(512);

static void BM_VanillaBestOfN(benchmark::State& state) {
  auto preds = random_predictions(static_cast<std::size_t>(state.range(0)), 16, 3);
  for (auto _ : state) {
    auto forecast = vanilla_best_of_n(preds);
    benchmark::DoNotOptimize(forecast);
  }
}
BENCHMARK(BM_VanillaBestOfN)->Arg(8)->Arg(64)->Arg(512);
