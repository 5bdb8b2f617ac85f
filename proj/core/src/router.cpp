#include "eventcast/router.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "eventcast/rng.hpp"

namespace eventcast {
namespace {

using nlohmann::json;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double sparse_dot(std::span<const double> weights,
                  const FeatureVector& features) {
  double z = 0.0;
  for (const auto& [index, value] : features.entries)
    z += weights[index] * value;
  return z;
}

void add_feature(std::vector<std::pair<std::uint32_t, double>>& raw,
                 std::string_view name, double weight, std::uint32_t dim) {
  raw.emplace_back(feature_index(name, dim), weight);
}

double bce(double p, bool y) {
  constexpr double kEps = 1e-12;
  p = std::clamp(p, kEps, 1.0 - kEps);
  return y ? -std::log(p) : -std::log(1.0 - p);
}

double full_loss(const RouterModel& model, const SupervisionSet& supervision) {
  const std::size_t n = model.expert_ids().size();
  double loss = 0.0;
  for (const SupervisionExample& ex : supervision.examples) {
    for (std::size_t e = 0; e < n; ++e) {
      bool y = ex.positive_experts.contains(model.expert_ids()[e]);
      loss += bce(model.score(e, ex.features), y);
    }
  }
  loss /= static_cast<double>(supervision.examples.size());
  double penalty = 0.0;
  for (std::size_t e = 0; e < n; ++e)
    for (double w : model.weights(e)) penalty += w * w;
  return loss + 0.5 * model.hyperparams().l2 * penalty;
}

}  // namespace

std::uint32_t feature_index(std::string_view name, std::uint32_t dim) {
  return static_cast<std::uint32_t>(fnv1a64(name) % dim);
}

FeatureVector featurize(const ForecastQuery& query, int horizon,
                        std::uint32_t dim) {
  if (horizon < 0)
    throw Error(ErrorCode::InvalidArgument, "horizon must be >= 0");
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "dim must be >= 1");

  std::vector<std::pair<std::uint32_t, double>> raw;
  add_feature(raw, "subj:" + query.subject, 1.0, dim);
  add_feature(raw, "rel:" + query.relation, 1.0, dim);
  add_feature(raw, "country:" + query.country, 1.0, dim);
  add_feature(raw, "month:" + std::to_string(query.timestamp.month()), 1.0,
              dim);

  const auto& events = query.history.events();
  const std::size_t take =
      std::min<std::size_t>(events.size(), static_cast<std::size_t>(horizon));
  double weight = 1.0;
  for (std::size_t j = 0; j < take; ++j) {
    const EventQuad& ev = events[events.size() - 1 - j];
    add_feature(raw, "hist_ent:" + ev.subject, weight, dim);
    add_feature(raw, "hist_ent:" + ev.object, weight, dim);
    weight *= 0.95;
  }

  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  FeatureVector features;
  for (const auto& [index, value] : raw) {
    if (!features.entries.empty() && features.entries.back().first == index)
      features.entries.back().second += value;
    else
      features.entries.emplace_back(index, value);
  }
  return features;
}

SupervisionSet build_supervision(std::span<const ForecastQuery> queries,
                                 ExpertPanel& panel,
                                 const RouterHyperparams& hp,
                                 std::uint64_t seed, int parallelism) {
  SupervisionSet set;
  set.expert_ids = panel.expert_ids();
  set.dim = hp.dim;
  set.horizon = hp.horizon;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const ForecastQuery& query = queries[i];
    auto fan = panel.query_all(query, mix64(seed, i), parallelism);
    if (fan.predictions.empty())
      throw Error(ErrorCode::PanelFailed,
                  "every expert failed on query " + std::to_string(i) + ": " +
                      (fan.failures.empty() ? "no detail"
                                            : fan.failures.front().second.what()));
    SupervisionExample example;
    for (const ExpertPrediction& pred : fan.predictions)
      if (pred.object == query.gold_object)
        example.positive_experts.insert(pred.expert_id);
    if (example.positive_experts.empty()) {
      ++set.skipped;
      continue;
    }
    example.features = featurize(query, hp.horizon, hp.dim);
    set.examples.push_back(std::move(example));
  }
  return set;
}

double RouterModel::score(std::size_t expert_index,
                          const FeatureVector& features) const {
  return sigmoid(sparse_dot(weights_[expert_index], features) +
                 biases_[expert_index]);
}

RouterModel RouterModel::from_parts(std::vector<std::string> expert_ids,
                                    RouterHyperparams hp, std::uint64_t seed,
                                    bool trained,
                                    std::vector<std::vector<double>> weights,
                                    std::vector<double> biases) {
  if (expert_ids.empty() || weights.size() != expert_ids.size() ||
      biases.size() != expert_ids.size())
    throw Error(ErrorCode::DataInvalid, "inconsistent router parts");
  for (const auto& w : weights)
    if (w.size() != hp.dim)
      throw Error(ErrorCode::DataInvalid, "weight vector size != dim");
  RouterModel model;
  model.ids_ = std::move(expert_ids);
  model.hp_ = hp;
  model.seed_ = seed;
  model.trained_ = trained;
  model.weights_ = std::move(weights);
  model.biases_ = std::move(biases);
  return model;
}

RouterModel train_router(const SupervisionSet& supervision,
                         const RouterHyperparams& hp, std::uint64_t seed) {
  if (supervision.examples.empty())
    throw Error(ErrorCode::EmptySupervision, "no supervision examples");
  if (hp.dim != supervision.dim || hp.horizon != supervision.horizon)
    throw Error(ErrorCode::ConfigInvalid,
                "hyperparameters disagree with supervision set (dim/horizon)");
  if (hp.batch_size < 1 || hp.epochs < 0 || hp.learning_rate <= 0.0)
    throw Error(ErrorCode::ConfigInvalid, "bad training hyperparameters");

  RouterModel model = make_untrained_router(supervision.expert_ids, hp, seed);
  const std::size_t n_experts = model.ids_.size();
  const std::size_t n_examples = supervision.examples.size();

  // Per-example label bitmaps, resolved once.
  std::vector<std::vector<char>> labels(n_examples,
                                        std::vector<char>(n_experts, 0));
  for (std::size_t i = 0; i < n_examples; ++i)
    for (std::size_t e = 0; e < n_experts; ++e)
      labels[i][e] = supervision.examples[i].positive_experts.contains(
                         model.ids_[e])
                         ? 1
                         : 0;

  SplitMix64 shuffle_rng(mix64(seed, 0x53484642u /* "SHFB" */));
  std::vector<std::size_t> order(n_examples);
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> grad(hp.dim, 0.0);
  std::vector<std::uint32_t> touched;

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n_examples;
         start += static_cast<std::size_t>(hp.batch_size)) {
      const std::size_t stop = std::min(
          n_examples, start + static_cast<std::size_t>(hp.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (std::size_t e = 0; e < n_experts; ++e) {
        auto& w = model.weights_[e];
        double grad_bias = 0.0;
        touched.clear();
        for (std::size_t pos = start; pos < stop; ++pos) {
          const std::size_t i = order[pos];
          const FeatureVector& x = supervision.examples[i].features;
          const double p = sigmoid(sparse_dot(w, x) + model.biases_[e]);
          const double g = p - (labels[i][e] ? 1.0 : 0.0);
          for (const auto& [index, value] : x.entries) {
            if (grad[index] == 0.0) touched.push_back(index);
            grad[index] += g * value;
          }
          grad_bias += g;
        }
        const double decay = 1.0 - hp.learning_rate * hp.l2;
        for (double& v : w) v *= decay;
        for (std::uint32_t index : touched) {
          w[index] -= hp.learning_rate * grad[index] * inv_batch;
          grad[index] = 0.0;
        }
        model.biases_[e] -= hp.learning_rate * grad_bias * inv_batch;
      }
    }
    model.losses_.push_back(full_loss(model, supervision));
  }
  model.trained_ = hp.epochs > 0;
  return model;
}

RouterModel make_untrained_router(std::vector<std::string> expert_ids,
                                  const RouterHyperparams& hp,
                                  std::uint64_t seed) {
  if (expert_ids.empty())
    throw Error(ErrorCode::ConfigInvalid, "router needs at least one expert");
  if (hp.dim == 0) throw Error(ErrorCode::ConfigInvalid, "dim must be >= 1");
  RouterModel model;
  model.ids_ = std::move(expert_ids);
  model.hp_ = hp;
  model.seed_ = seed;
  model.trained_ = false;
  model.biases_.assign(model.ids_.size(), 0.0);
  model.weights_.resize(model.ids_.size());
  SplitMix64 rng(mix64(seed, 0x494e4954u /* "INIT" */));
  for (auto& w : model.weights_) {
    w.resize(hp.dim);
    for (double& v : w) v = rng.next_gaussian(hp.init_sigma);
  }
  return model;
}

std::vector<std::pair<std::string, double>> rank_experts(
    const RouterModel& model, const ForecastQuery& query, int k) {
  const int n = static_cast<int>(model.expert_ids().size());
  if (k < 1 || k > n)
    throw Error(ErrorCode::BadK, "k = " + std::to_string(k) +
                                     " outside [1, " + std::to_string(n) + "]");
  FeatureVector features =
      featurize(query, model.hyperparams().horizon, model.dim());
  std::vector<std::pair<std::string, double>> ranking;
  ranking.reserve(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < model.expert_ids().size(); ++e)
    ranking.emplace_back(model.expert_ids()[e], model.score(e, features));
  std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  ranking.resize(static_cast<std::size_t>(k));
  return ranking;
}

void save_router(const RouterModel& model, const std::filesystem::path& path) {
  json doc;
  doc["version"] = 1;
  doc["D"] = model.dim();
  doc["seed"] = model.seed();
  doc["trained"] = model.trained();
  const RouterHyperparams& hp = model.hyperparams();
  doc["hyperparameters"] = {
      {"learning_rate", hp.learning_rate}, {"epochs", hp.epochs},
      {"batch_size", hp.batch_size},       {"l2", hp.l2},
      {"horizon", hp.horizon},             {"init_sigma", hp.init_sigma}};
  json experts = json::array();
  for (std::size_t e = 0; e < model.expert_ids().size(); ++e) {
    json entry;
    entry["expert_id"] = model.expert_ids()[e];
    entry["bias"] = model.bias(e);
    json weights = json::array();
    auto w = model.weights(e);
    for (std::uint32_t i = 0; i < w.size(); ++i)
      if (w[i] != 0.0) weights.push_back(json::array({i, w[i]}));
    entry["weights"] = std::move(weights);
    experts.push_back(std::move(entry));
  }
  doc["experts"] = std::move(experts);

  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::SourceUnreadable,
                "cannot write " + path.string());
  out << doc.dump() << '\n';
}

RouterModel load_router(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::SourceUnreadable, "cannot read " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::DataInvalid, "malformed router file " + path.string());
  try {
    RouterHyperparams hp;
    hp.dim = doc.at("D").get<std::uint32_t>();
    const json& h = doc.at("hyperparameters");
    hp.learning_rate = h.at("learning_rate").get<double>();
    hp.epochs = h.at("epochs").get<int>();
    hp.batch_size = h.at("batch_size").get<int>();
    hp.l2 = h.at("l2").get<double>();
    hp.horizon = h.at("horizon").get<int>();
    hp.init_sigma = h.at("init_sigma").get<double>();

    std::vector<std::string> ids;
    std::vector<std::vector<double>> weights;
    std::vector<double> biases;
    for (const json& entry : doc.at("experts")) {
      ids.push_back(entry.at("expert_id").get<std::string>());
      biases.push_back(entry.at("bias").get<double>());
      std::vector<double> w(hp.dim, 0.0);
      for (const json& pair : entry.at("weights")) {
        std::uint32_t index = pair.at(0).get<std::uint32_t>();
        if (index >= hp.dim)
          throw Error(ErrorCode::DataInvalid, "weight index out of range");
        w[index] = pair.at(1).get<double>();
      }
      weights.push_back(std::move(w));
    }
    return RouterModel::from_parts(std::move(ids), hp,
                                   doc.at("seed").get<std::uint64_t>(),
                                   doc.at("trained").get<bool>(),
                                   std::move(weights), std::move(biases));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DataInvalid,
                "malformed router file " + path.string() + ": " + e.what());
  }
}

void require_panel_match(const RouterModel& model, const ExpertPanel& panel) {
  std::vector<std::string> a = model.expert_ids();
  std::vector<std::string> b = panel.expert_ids();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b)
    throw Error(ErrorCode::ModelPanelMismatch,
                "router expert set differs from the active panel");
}

}  // namespace eventcast
