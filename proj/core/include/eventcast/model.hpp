#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eventcast/date.hpp"
#include "eventcast/error.hpp"

namespace eventcast {

/// Sentinel object id for expert outputs that match no known entity.
/// Normalized entity ids are lowercase, so this value can never collide
/// with a real entity; it always scores as incorrect.
inline constexpr std::string_view kUnparseable = "<UNPARSEABLE>";

/// One structured event: subject, relation, object, timestamp, plus the
/// country partition attribute and an optional context grouping key.
/// Entity and relation ids are stored in normalized form.
struct EventQuad {
  std::string event_id;
  std::string subject;
  std::string relation;
  std::string object;
  Date timestamp;
  std::string country;     // ISO 3166 alpha-3, uppercase
  std::string context_id;  // empty = none

  bool operator==(const EventQuad&) const = default;
};

/// Lowercases, collapses internal whitespace runs, and strips surrounding
/// punctuation. Idempotent. Throws EmptyAfterNormalization when nothing
/// survives.
std::string normalize_entity(std::string_view raw);

/// True for exactly three ASCII uppercase letters.
bool is_country_code(std::string_view code) noexcept;

/// Validating constructor: normalizes subject/relation/object and checks
/// the country code and timestamp invariants.
EventQuad make_event(std::string event_id, std::string_view subject,
                     std::string_view relation, std::string_view object,
                     Date timestamp, std::string country,
                     std::string context_id = "");

/// Chronologically ordered event sequence; ties broken by event_id.
class EventHistory {
 public:
  EventHistory() = default;

  static EventHistory from_events(std::vector<EventQuad> events);

  const std::vector<EventQuad>& events() const noexcept { return events_; }
  bool empty() const noexcept { return events_.empty(); }
  std::size_t size() const noexcept { return events_.size(); }

  bool operator==(const EventHistory&) const = default;

 private:
  std::vector<EventQuad> events_;
};

/// A partially specified triple (s, r, ?, t) with its historical event
/// sequence. gold_object is hidden from experts at prediction time and
/// used only for supervision and evaluation.
struct ForecastQuery {
  std::string subject;
  std::string relation;
  Date timestamp;
  std::string country;
  EventHistory history;
  std::string gold_object;

  bool operator==(const ForecastQuery&) const = default;
};

/// Builds the query for `quad`: projects (s, r, t, country), hides the
/// object as the gold label, and attaches the history. Every history event
/// must be strictly earlier than the quad's timestamp.
ForecastQuery make_query(const EventQuad& quad, EventHistory history);

/// One expert's answer: a predicted object (or kUnparseable) with a
/// confidence in [0, 1].
struct ExpertPrediction {
  std::string expert_id;
  std::string object;
  double confidence = 0.0;

  bool operator==(const ExpertPrediction&) const = default;
};

enum class StrategyKind {
  Routing,
  MajorityVote,
  VanillaBestOfN,
  WeightedBestOfN,
  Elite,
};

const char* to_string(StrategyKind kind) noexcept;

/// The leader model's synthesized output. `object` is the arg-max of
/// score_table under the global tie-break rule: highest aggregate score,
/// then highest single contributing confidence, then lexicographically
/// smallest object id.
struct AggregatedForecast {
  std::string object;
  StrategyKind strategy = StrategyKind::MajorityVote;
  std::map<std::string, double> score_table;
  std::vector<std::string> contributing_experts;  // sorted, unique

  bool operator==(const AggregatedForecast&) const = default;
};

}  // namespace eventcast
