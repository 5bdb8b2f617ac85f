#include "eventcast/evaluation.hpp"

#include <algorithm>
#include <thread>

#include "eventcast/rng.hpp"

namespace eventcast {
namespace {

AggregatedForecast forecast_one(ExpertPanel& panel, const RouterModel* model,
                                const StrategyConfig& strategy,
                                const ForecastQuery& query,
                                std::uint64_t draw_key) {
  switch (strategy.kind) {
    case StrategyKind::Routing:
      return expert_routing_forecast(*model, panel, query, draw_key);
    case StrategyKind::Elite:
      return elite_ensemble_forecast(*model, panel, query, strategy.k,
                                     strategy.inner, draw_key);
    default: {
      auto fan = panel.query_all(query, draw_key);
      if (fan.predictions.empty())
        throw Error(ErrorCode::PanelFailed,
                    "every expert failed: " +
                        std::string(fan.failures.front().second.what()));
      return aggregate(strategy.kind, std::move(fan.predictions));
    }
  }
}

}  // namespace

EvaluationReport score_predictions(std::span<const Outcome> outcomes) {
  if (outcomes.empty())
    throw Error(ErrorCode::EmptyOutcomes, "nothing to score");
  EvaluationReport report;
  for (const auto& [query, forecast] : outcomes) {
    CountryTally& tally = report.per_country[query.country];
    tally.total += 1;
    if (forecast.object == query.gold_object) tally.correct += 1;
  }
  std::uint64_t correct = 0;
  double accuracy_sum = 0.0;
  for (const auto& [country, tally] : report.per_country) {
    correct += tally.correct;
    accuracy_sum += tally.accuracy();
  }
  report.query_count = outcomes.size();
  report.micro = static_cast<double>(correct) /
                 static_cast<double>(report.query_count);
  report.macro = accuracy_sum / static_cast<double>(report.per_country.size());
  return report;
}

EvaluationReport run_strategy_eval(ExpertPanel& panel, const RouterModel* model,
                                   const StrategyConfig& strategy,
                                   std::span<const ForecastQuery> test,
                                   std::uint64_t seed, int parallelism) {
  if (strategy.needs_router() && model == nullptr)
    throw Error(ErrorCode::MissingRouter,
                std::string(to_string(strategy.kind)) +
                    " requires a trained router model");
  if (strategy.kind == StrategyKind::Elite &&
      (strategy.k < 1 || strategy.k > static_cast<int>(panel.size())))
    throw Error(ErrorCode::BadK, "elite k outside [1, N]");
  if (model != nullptr) require_panel_match(*model, panel);
  if (test.empty()) throw Error(ErrorCode::EmptyOutcomes, "empty test slice");

  panel.reset_call_count();
  std::vector<AggregatedForecast> forecasts(test.size());
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      forecasts[i] =
          forecast_one(panel, model, strategy, test[i], mix64(seed, i));
  };
  if (parallelism <= 1 || test.size() < 2) {
    run_range(0, test.size());
  } else {
    const std::size_t threads = std::min<std::size_t>(
        static_cast<std::size_t>(parallelism), test.size());
    const std::size_t chunk = (test.size() + threads - 1) / threads;
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(test.size(), begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([=] { run_range(begin, end); });
    }
    for (auto& w : workers) w.join();
  }

  std::vector<Outcome> outcomes;
  outcomes.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i)
    outcomes.emplace_back(test[i], std::move(forecasts[i]));
  EvaluationReport report = score_predictions(outcomes);
  report.strategy = strategy;
  report.seed = seed;
  report.backend_calls = panel.backend_calls();
  return report;
}

std::vector<KSweepCurve> k_sweep(ExpertPanel& panel, const RouterModel& model,
                                 StrategyKind inner,
                                 std::span<const ForecastQuery> test,
                                 std::span<const std::uint64_t> seeds,
                                 int parallelism) {
  if (seeds.empty())
    throw Error(ErrorCode::ConfigInvalid, "k_sweep needs at least one seed");
  std::vector<KSweepCurve> curves;
  curves.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    KSweepCurve curve;
    curve.trained_router = model.trained();
    curve.inner = inner;
    curve.seed = seed;
    for (int k = 1; k <= static_cast<int>(panel.size()); ++k) {
      auto report = run_strategy_eval(panel, &model,
                                      StrategyConfig::elite(k, inner), test,
                                      seed, parallelism);
      curve.points.push_back({k, report.micro});
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

KSweepCurve mean_curve(std::span<const KSweepCurve> curves) {
  if (curves.empty())
    throw Error(ErrorCode::InvalidArgument, "no curves to average");
  KSweepCurve mean;
  mean.trained_router = curves.front().trained_router;
  mean.inner = curves.front().inner;
  mean.seed = std::nullopt;
  const std::size_t n_points = curves.front().points.size();
  for (std::size_t p = 0; p < n_points; ++p) {
    double sum = 0.0;
    for (const KSweepCurve& curve : curves) {
      if (curve.points.size() != n_points)
        throw Error(ErrorCode::InvalidArgument, "curves have unequal length");
      sum += curve.points[p].micro;
    }
    mean.points.push_back(
        {curves.front().points[p].k, sum / static_cast<double>(curves.size())});
  }
  return mean;
}

}  // namespace eventcast
