#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eventcast/aggregation.hpp"
#include "eventcast/experts.hpp"
#include "eventcast/model.hpp"
#include "eventcast/router.hpp"

namespace eventcast {

struct CountryTally {
  std::uint64_t correct = 0;
  std::uint64_t total = 0;

  double accuracy() const noexcept {
    return total == 0 ? 0.0
                      : static_cast<double>(correct) / static_cast<double>(total);
  }

  bool operator==(const CountryTally&) const = default;
};

/// Per-country accuracies plus micro (total correct / total queries) and
/// macro (unweighted mean over countries present in the evaluated slice).
struct EvaluationReport {
  std::map<std::string, CountryTally> per_country;
  double micro = 0.0;
  double macro = 0.0;
  StrategyConfig strategy;
  std::uint64_t seed = 0;
  std::uint64_t query_count = 0;
  std::uint64_t backend_calls = 0;
};

using Outcome = std::pair<ForecastQuery, AggregatedForecast>;

/// A query counts correct iff forecast.object equals the gold object
/// exactly. Throws EmptyOutcomes.
EvaluationReport score_predictions(std::span<const Outcome> outcomes);

/// Forecasts every test query under `strategy` and scores the outcomes.
/// Deterministic given (panel seeds, model, seed): the draw key for query i
/// is mix64(seed, i) regardless of strategy. Throws MissingRouter when a
/// router-dependent strategy is run without a model.
EvaluationReport run_strategy_eval(ExpertPanel& panel, const RouterModel* model,
                                   const StrategyConfig& strategy,
                                   std::span<const ForecastQuery> test,
                                   std::uint64_t seed, int parallelism = 1);

struct KSweepPoint {
  int k = 0;
  double micro = 0.0;
};

/// Elite micro accuracy as a function of k, for one seed (or the mean over
/// seeds when seed is empty).
struct KSweepCurve {
  std::vector<KSweepPoint> points;  // k strictly increasing, 1..N
  bool trained_router = true;
  StrategyKind inner = StrategyKind::WeightedBestOfN;
  std::optional<std::uint64_t> seed;
};

/// One curve per seed, k = 1..N. By construction the point at k = 1 equals
/// the Routing micro and the point at k = N equals the full Wisdom micro
/// for the same seed.
std::vector<KSweepCurve> k_sweep(ExpertPanel& panel, const RouterModel& model,
                                 StrategyKind inner,
                                 std::span<const ForecastQuery> test,
                                 std::span<const std::uint64_t> seeds,
                                 int parallelism = 1);

/// Pointwise mean of per-seed curves (seed left empty).
KSweepCurve mean_curve(std::span<const KSweepCurve> curves);

}  // namespace eventcast
