#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eventcast/experts.hpp"
#include "eventcast/model.hpp"
#include "eventcast/router.hpp"

namespace eventcast {

/// Leader strategy selection. Elite carries both k and an inner wisdom
/// strategy; the other kinds carry neither.
struct StrategyConfig {
  StrategyKind kind = StrategyKind::MajorityVote;
  int k = 0;
  StrategyKind inner = StrategyKind::WeightedBestOfN;

  static StrategyConfig routing();
  static StrategyConfig wisdom(StrategyKind inner);
  static StrategyConfig elite(int k, StrategyKind inner);

  bool needs_router() const noexcept {
    return kind == StrategyKind::Routing || kind == StrategyKind::Elite;
  }

  /// Filename-friendly tag, e.g. "elite_k5_weighted_bon".
  std::string slug() const;

  bool operator==(const StrategyConfig&) const = default;
};

/// The most frequent prediction wins; score_table holds vote counts.
AggregatedForecast majority_vote(std::vector<ExpertPrediction> predictions);

/// The single highest-confidence prediction wins; score_table holds the
/// max confidence per object.
AggregatedForecast vanilla_best_of_n(std::vector<ExpertPrediction> predictions);

/// Sums confidences of identical predictions and takes the arg-max:
/// score(o) = sum_j c_j * [o_j = o].
AggregatedForecast weighted_best_of_n(std::vector<ExpertPrediction> predictions);

/// Applies the wisdom strategy named by `kind` (one of the three above).
AggregatedForecast aggregate(StrategyKind kind,
                             std::vector<ExpertPrediction> predictions);

/// Delegates the query to the router's top-1 expert; exactly one backend
/// call. Throws RoutedExpertFailed if that expert errors.
AggregatedForecast expert_routing_forecast(const RouterModel& model,
                                           ExpertPanel& panel,
                                           const ForecastQuery& query,
                                           std::uint64_t draw_key = 0);

/// Queries exactly the router's top-k experts and applies the inner
/// strategy to the surviving predictions. Throws AllEliteExpertsFailed when
/// every selected expert errors.
AggregatedForecast elite_ensemble_forecast(const RouterModel& model,
                                           ExpertPanel& panel,
                                           const ForecastQuery& query, int k,
                                           StrategyKind inner,
                                           std::uint64_t draw_key = 0);

}  // namespace eventcast
