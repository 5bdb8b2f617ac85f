#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "eventcast/experts.hpp"
#include "eventcast/model.hpp"

namespace eventcast {

inline constexpr std::uint32_t kDefaultFeatureDim = 65536;

/// Sparse hashed feature vector: (index, weight) pairs sorted by index,
/// indices unique, collisions accumulated additively.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool operator==(const FeatureVector&) const = default;
};

/// Hash bucket of a feature name within a table of size dim.
std::uint32_t feature_index(std::string_view name, std::uint32_t dim);

/// Query encoding: "subj:", "rel:", "country:", "month:" features at weight
/// 1.0, plus "hist_ent:" features for the subject and object of the j-th
/// most recent of the last `horizon` history events at weight 0.95^j.
FeatureVector featurize(const ForecastQuery& query, int horizon,
                        std::uint32_t dim = kDefaultFeatureDim);

struct RouterHyperparams {
  double learning_rate = 0.1;
  int epochs = 10;
  int batch_size = 32;
  double l2 = 1e-4;
  int horizon = 8;
  double init_sigma = 0.01;
  std::uint32_t dim = kDefaultFeatureDim;
};

/// One training example: query features and the experts that answered it
/// correctly (never empty).
struct SupervisionExample {
  FeatureVector features;
  std::set<std::string> positive_experts;
};

/// Supervision built against a fixed panel; dim/horizon record how the
/// features were hashed. `skipped` counts queries no expert got right.
struct SupervisionSet {
  std::vector<std::string> expert_ids;
  std::uint32_t dim = kDefaultFeatureDim;
  int horizon = 8;
  std::size_t skipped = 0;
  std::vector<SupervisionExample> examples;
};

/// Queries every panel expert on every query; experts whose prediction
/// equals the gold object become positives. Queries with an empty positive
/// set are dropped and tallied in `skipped`. Throws PanelFailed only when
/// every expert errors on a query.
SupervisionSet build_supervision(std::span<const ForecastQuery> queries,
                                 ExpertPanel& panel,
                                 const RouterHyperparams& hp,
                                 std::uint64_t seed, int parallelism = 1);

/// One independent binary logistic scorer per panel expert over the hashed
/// feature space. Immutable once built; safe for concurrent ranking.
class RouterModel {
 public:
  const std::vector<std::string>& expert_ids() const noexcept { return ids_; }
  std::uint32_t dim() const noexcept { return hp_.dim; }
  const RouterHyperparams& hyperparams() const noexcept { return hp_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool trained() const noexcept { return trained_; }

  /// Mean training loss (BCE + L2 penalty) measured after each epoch.
  const std::vector<double>& epoch_losses() const noexcept { return losses_; }

  /// sigmoid(w . features + bias) for one expert.
  double score(std::size_t expert_index, const FeatureVector& features) const;

  double bias(std::size_t expert_index) const { return biases_[expert_index]; }
  std::span<const double> weights(std::size_t expert_index) const {
    return weights_[expert_index];
  }

  /// Assembles a model from persisted parts.
  static RouterModel from_parts(std::vector<std::string> expert_ids,
                                RouterHyperparams hp, std::uint64_t seed,
                                bool trained,
                                std::vector<std::vector<double>> weights,
                                std::vector<double> biases);

 private:
  friend RouterModel train_router(const SupervisionSet&,
                                  const RouterHyperparams&, std::uint64_t);
  friend RouterModel make_untrained_router(std::vector<std::string>,
                                           const RouterHyperparams&,
                                           std::uint64_t);

  std::vector<std::string> ids_;
  RouterHyperparams hp_;
  std::uint64_t seed_ = 0;
  bool trained_ = false;
  std::vector<std::vector<double>> weights_;  // [expert][dim]
  std::vector<double> biases_;
  std::vector<double> losses_;
};

/// SGD on per-expert binary cross-entropy with L2, shuffled per epoch by a
/// seeded permutation. Deterministic given (supervision, hp, seed). The
/// hp must agree with the supervision set's dim/horizon.
RouterModel train_router(const SupervisionSet& supervision,
                         const RouterHyperparams& hp, std::uint64_t seed);

/// Seeded Gaussian initialization (sigma = hp.init_sigma), zero training.
RouterModel make_untrained_router(std::vector<std::string> expert_ids,
                                  const RouterHyperparams& hp,
                                  std::uint64_t seed);

/// Top-k experts by sigmoid score, descending; ties by lexicographic
/// expert id. Throws BadK unless 1 <= k <= N.
std::vector<std::pair<std::string, double>> rank_experts(
    const RouterModel& model, const ForecastQuery& query, int k);

/// JSON persistence (nonzero weights only).
void save_router(const RouterModel& model, const std::filesystem::path& path);
RouterModel load_router(const std::filesystem::path& path);

/// Throws ModelPanelMismatch when the model's expert set differs from the
/// panel's.
void require_panel_match(const RouterModel& model, const ExpertPanel& panel);

}  // namespace eventcast
