#include "eventcast/aggregation.hpp"

#include <algorithm>
#include <map>

namespace eventcast {
namespace {

/// Canonical prediction order: aggregation results must not depend on the
/// arrival order of a fan-out.
void sort_canonical(std::vector<ExpertPrediction>& predictions) {
  std::sort(predictions.begin(), predictions.end(),
            [](const ExpertPrediction& a, const ExpertPrediction& b) {
              if (a.expert_id != b.expert_id) return a.expert_id < b.expert_id;
              if (a.object != b.object) return a.object < b.object;
              return a.confidence < b.confidence;
            });
}

std::vector<std::string> contributor_ids(
    const std::vector<ExpertPrediction>& predictions) {
  std::vector<std::string> ids;
  ids.reserve(predictions.size());
  for (const ExpertPrediction& p : predictions) ids.push_back(p.expert_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

/// Global tie-break: highest aggregate score, then highest single
/// contributing confidence, then lexicographically smallest object id.
/// Iterating the (ordered) score table and replacing only on strict
/// improvement realizes the lexicographic leg.
AggregatedForecast pick_winner(StrategyKind strategy,
                               std::map<std::string, double> score_table,
                               const std::map<std::string, double>& best_conf,
                               std::vector<std::string> contributors) {
  AggregatedForecast forecast;
  forecast.strategy = strategy;
  const std::string* winner = nullptr;
  double winner_score = 0.0;
  double winner_conf = 0.0;
  for (const auto& [object, score] : score_table) {
    const double conf = best_conf.at(object);
    if (winner == nullptr || score > winner_score ||
        (score == winner_score && conf > winner_conf)) {
      winner = &object;
      winner_score = score;
      winner_conf = conf;
    }
  }
  forecast.object = *winner;
  forecast.score_table = std::move(score_table);
  forecast.contributing_experts = std::move(contributors);
  return forecast;
}

void require_nonempty(const std::vector<ExpertPrediction>& predictions) {
  if (predictions.empty())
    throw Error(ErrorCode::EmptyPredictions, "no predictions to aggregate");
}

}  // namespace

StrategyConfig StrategyConfig::routing() {
  return {StrategyKind::Routing, 0, StrategyKind::WeightedBestOfN};
}

StrategyConfig StrategyConfig::wisdom(StrategyKind inner) {
  return {inner, 0, StrategyKind::WeightedBestOfN};
}

StrategyConfig StrategyConfig::elite(int k, StrategyKind inner) {
  return {StrategyKind::Elite, k, inner};
}

std::string StrategyConfig::slug() const {
  if (kind == StrategyKind::Elite)
    return std::string("elite_k") + std::to_string(k) + "_" +
           to_string(inner);
  return to_string(kind);
}

AggregatedForecast majority_vote(std::vector<ExpertPrediction> predictions) {
  require_nonempty(predictions);
  sort_canonical(predictions);
  std::map<std::string, double> votes;
  std::map<std::string, double> best_conf;
  for (const ExpertPrediction& p : predictions) {
    votes[p.object] += 1.0;
    auto [it, inserted] = best_conf.emplace(p.object, p.confidence);
    if (!inserted) it->second = std::max(it->second, p.confidence);
  }
  return pick_winner(StrategyKind::MajorityVote, std::move(votes), best_conf,
                     contributor_ids(predictions));
}

AggregatedForecast vanilla_best_of_n(std::vector<ExpertPrediction> predictions) {
  require_nonempty(predictions);
  sort_canonical(predictions);
  std::map<std::string, double> best;
  for (const ExpertPrediction& p : predictions) {
    auto [it, inserted] = best.emplace(p.object, p.confidence);
    if (!inserted) it->second = std::max(it->second, p.confidence);
  }
  return pick_winner(StrategyKind::VanillaBestOfN, best, best,
                     contributor_ids(predictions));
}

AggregatedForecast weighted_best_of_n(std::vector<ExpertPrediction> predictions) {
  require_nonempty(predictions);
  sort_canonical(predictions);
  std::map<std::string, double> scores;
  std::map<std::string, double> best_conf;
  for (const ExpertPrediction& p : predictions) {
    scores[p.object] += p.confidence;
    auto [it, inserted] = best_conf.emplace(p.object, p.confidence);
    if (!inserted) it->second = std::max(it->second, p.confidence);
  }
  return pick_winner(StrategyKind::WeightedBestOfN, std::move(scores),
                     best_conf, contributor_ids(predictions));
}

AggregatedForecast aggregate(StrategyKind kind,
                             std::vector<ExpertPrediction> predictions) {
  switch (kind) {
    case StrategyKind::MajorityVote: return majority_vote(std::move(predictions));
    case StrategyKind::VanillaBestOfN:
      return vanilla_best_of_n(std::move(predictions));
    case StrategyKind::WeightedBestOfN:
      return weighted_best_of_n(std::move(predictions));
    default:
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(kind)) + " is not a wisdom strategy");
  }
}

AggregatedForecast expert_routing_forecast(const RouterModel& model,
                                           ExpertPanel& panel,
                                           const ForecastQuery& query,
                                           std::uint64_t draw_key) {
  require_panel_match(model, panel);
  auto top = rank_experts(model, query, 1);
  std::vector<std::string> chosen = {top.front().first};
  auto fan = panel.query_subset(chosen, query, draw_key);
  if (fan.predictions.empty())
    throw Error(ErrorCode::RoutedExpertFailed,
                chosen.front() + ": " + fan.failures.front().second.what());
  const ExpertPrediction& pred = fan.predictions.front();
  AggregatedForecast forecast;
  forecast.strategy = StrategyKind::Routing;
  forecast.object = pred.object;
  forecast.score_table = {{pred.object, pred.confidence}};
  forecast.contributing_experts = {pred.expert_id};
  return forecast;
}

AggregatedForecast elite_ensemble_forecast(const RouterModel& model,
                                           ExpertPanel& panel,
                                           const ForecastQuery& query, int k,
                                           StrategyKind inner,
                                           std::uint64_t draw_key) {
  require_panel_match(model, panel);
  auto ranking = rank_experts(model, query, k);
  std::vector<std::string> chosen;
  chosen.reserve(ranking.size());
  for (const auto& [expert_id, score] : ranking) chosen.push_back(expert_id);
  auto fan = panel.query_subset(chosen, query, draw_key);
  if (fan.predictions.empty())
    throw Error(ErrorCode::AllEliteExpertsFailed,
                "all " + std::to_string(k) + " selected experts failed");
  AggregatedForecast forecast = aggregate(inner, std::move(fan.predictions));
  forecast.strategy = StrategyKind::Elite;
  return forecast;
}

}  // namespace eventcast
