#include <benchmark/benchmark.h>

#include "eventcast/router.hpp"
#include "eventcast/rng.hpp"

using namespace eventcast;

namespace {

ForecastQuery query_with_history(int events) {
  std::vector<EventQuad> history;
  for (int i = 0; i < events; ++i)
    history.push_back(make_event(
        "h" + std::to_string(i), "entity_" + std::to_string(i % 12), "met",
        "entity_" + std::to_string((i + 5) % 12),
        add_days(*Date::parse("2023-01-01"), i), "ISR"));
  auto target = make_event("t", "entity_0", "consults", "entity_7",
                           *Date::parse("2024-02-01"), "ISR");
  return make_query(target, EventHistory::from_events(std::move(history)));
}

SupervisionSet synthetic_supervision(std::size_t examples, std::size_t experts) {
  SplitMix64 rng(5);
  SupervisionSet set;
  for (std::size_t e = 0; e < experts; ++e)
    set.expert_ids.push_back("expert_" + std::to_string(e));
  for (std::size_t i = 0; i < examples; ++i) {
    SupervisionExample example;
    for (int f = 0; f < 12; ++f)
      example.features.entries.emplace_back(
          static_cast<std::uint32_t>(rng.next_below(set.dim)),
          rng.next_in(0.5, 1.0));
    std::sort(example.features.entries.begin(), example.features.entries.end());
    example.positive_experts.insert(
        "expert_" + std::to_string(rng.next_below(experts)));
    set.examples.push_back(std::move(example));
  }
  return set;
}

}  // namespace

static void BM_Featurize(benchmark::State& state) {
  auto query = query_with_history(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto features = featurize(query, 8);
    benchmark::DoNotOptimize(features);
  }
}
BENCHMARK(BM_Featurize)->Arg(0)->Arg(8)->Arg(30);

static void BM_RankExperts(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> ids;
  for (std::size_t e = 0; e < n; ++e) ids.push_back("expert_" + std::to_string(e));
  RouterHyperparams hp;
  auto model = make_untrained_router(ids, hp, 3);
  auto query = query_with_history(8);
  for (auto _ : state) {
    auto ranking = rank_experts(model, query, static_cast<int>(n));
    benchmark::DoNotOptimize(ranking);
  }
}
BENCHMARK(BM_RankExperts)->Arg(8)->Arg(35);

static void BM_TrainRouterEpoch(benchmark::State& state) {
  auto supervision = synthetic_supervision(
      static_cast<std::size_t>(state.range(0)), 8);
  RouterHyperparams hp;
  hp.epochs = 1;
  for (auto _ : state) {
    auto model = train_router(supervision, hp, 42);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_TrainRouterEpoch)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
