#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "eventcast/dataset.hpp"
#include "eventcast/model.hpp"

namespace eventcast {

/// Structural prompt for completion-style experts. Slot syntax: {date},
/// {subject}, {relation}, {object}.
struct PromptTemplate {
  std::string role_preamble;
  std::string history_line_format;  // needs {date} {subject} {relation} {object}
  std::string query_line_format;    // needs {date} {subject} {relation}
  int max_history = 30;

  static PromptTemplate standard();
};

/// Marker emitted in place of history lines when the query has none.
inline constexpr std::string_view kNoHistoryMarker =
    "(no prior events recorded)";

/// Throws ConfigInvalid when a template is missing a required slot.
void validate_template(const PromptTemplate& tmpl);

/// Renders: preamble, the most recent max_history events in chronological
/// order, then the query line. The gold object never appears in the query
/// line.
std::string build_prompt(const ForecastQuery& query,
                         const PromptTemplate& tmpl);

/// Geometric-mean token probability: exp(mean of logprobs). Inputs must be
/// non-empty and <= 0 (EmptyLogprobs / PositiveLogprob otherwise).
double extract_confidence(std::span<const double> token_logprobs);

/// Seeded stand-in for a country-specialized expert: emits the gold object
/// with probability p_home on home-country queries (p_away otherwise), and
/// a uniformly drawn wrong candidate the rest of the time. Confidences are
/// drawn from the correct/wrong intervals.
struct MockExpertProfile {
  std::set<std::string> home_countries;
  double p_home = 0.7;
  double p_away = 0.1;
  double conf_correct_lo = 0.55;
  double conf_correct_hi = 0.95;
  double conf_wrong_lo = 0.05;
  double conf_wrong_hi = 0.60;
  std::uint64_t seed = 0;
};

/// Throws InvalidSpec when probabilities or intervals are out of range.
void validate_profile(const MockExpertProfile& profile);

/// Deterministic given (profile.seed, draw_key). `candidates` must be
/// sorted ascending, contain the query's gold object, and have >= 2
/// entries (CandidatePoolTooSmall otherwise).
ExpertPrediction mock_predict(const MockExpertProfile& profile,
                              const ForecastQuery& query,
                              std::span<const std::string> candidates,
                              std::uint64_t draw_key,
                              const std::string& expert_id);

/// Per-country candidate object pools derived from a corpus: the distinct
/// object entities observed for each country, with the full object set as
/// fallback for unseen countries.
class CandidatePools {
 public:
  static CandidatePools from_events(std::span<const EventQuad> events);

  std::span<const std::string> for_country(const std::string& country) const;
  std::span<const std::string> all_objects() const { return all_; }

 private:
  std::map<std::string, std::vector<std::string>> by_country_;
  std::vector<std::string> all_;
};

/// A pluggable expert. predict() must be callable from multiple threads.
class ExpertBackend {
 public:
  virtual ~ExpertBackend() = default;
  virtual Result<ExpertPrediction> predict(const ForecastQuery& query,
                                           std::uint64_t draw_key) = 0;
};

class MockExpertBackend final : public ExpertBackend {
 public:
  MockExpertBackend(std::string expert_id, MockExpertProfile profile,
                    std::shared_ptr<const CandidatePools> pools)
      : expert_id_(std::move(expert_id)),
        profile_(std::move(profile)),
        pools_(std::move(pools)) {
    validate_profile(profile_);
  }

  Result<ExpertPrediction> predict(const ForecastQuery& query,
                                   std::uint64_t draw_key) override;

  const MockExpertProfile& profile() const noexcept { return profile_; }

 private:
  std::string expert_id_;
  MockExpertProfile profile_;
  std::shared_ptr<const CandidatePools> pools_;
};

struct PanelExpert {
  std::string expert_id;
  std::shared_ptr<ExpertBackend> backend;
  std::set<std::string> home_countries;
};

/// Ordered expert roster with fan-out. An errored expert contributes no
/// prediction; aggregation proceeds over the survivors. Results are sorted
/// by expert_id so outputs do not depend on completion order.
class ExpertPanel {
 public:
  explicit ExpertPanel(std::vector<PanelExpert> experts);

  ExpertPanel(ExpertPanel&& other) noexcept
      : experts_(std::move(other.experts_)),
        ids_(std::move(other.ids_)),
        index_(std::move(other.index_)),
        calls_(other.calls_.load()) {}
  ExpertPanel& operator=(ExpertPanel&& other) noexcept {
    experts_ = std::move(other.experts_);
    ids_ = std::move(other.ids_);
    index_ = std::move(other.index_);
    calls_.store(other.calls_.load());
    return *this;
  }
  ExpertPanel(const ExpertPanel&) = delete;
  ExpertPanel& operator=(const ExpertPanel&) = delete;

  std::size_t size() const noexcept { return experts_.size(); }
  const std::vector<PanelExpert>& experts() const noexcept { return experts_; }
  const std::vector<std::string>& expert_ids() const noexcept { return ids_; }

  /// Index of an expert by id; throws InvalidArgument for unknown ids.
  std::size_t index_of(const std::string& expert_id) const;

  struct FanOut {
    std::vector<ExpertPrediction> predictions;              // sorted by expert_id
    std::vector<std::pair<std::string, Error>> failures;    // sorted by expert_id
  };

  FanOut query_all(const ForecastQuery& query, std::uint64_t draw_key,
                   int parallelism = 1);
  FanOut query_subset(std::span<const std::string> expert_ids,
                      const ForecastQuery& query, std::uint64_t draw_key,
                      int parallelism = 1);

  /// Total backend calls attempted since construction or the last reset.
  std::uint64_t backend_calls() const noexcept { return calls_.load(); }
  void reset_call_count() noexcept { calls_.store(0); }

 private:
  std::vector<PanelExpert> experts_;
  std::vector<std::string> ids_;
  std::map<std::string, std::size_t> index_;
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace eventcast
