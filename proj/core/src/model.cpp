#include "eventcast/model.hpp"

#include <algorithm>
#include <cctype>

namespace eventcast {

std::string normalize_entity(std::string_view raw) {
  std::string collapsed;
  collapsed.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char ch : raw) {
    if (std::isspace(ch)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) {
      collapsed.push_back(' ');
      pending_space = false;
    }
    collapsed.push_back(static_cast<char>(std::tolower(ch)));
  }
  auto is_kept = [](unsigned char c) { return std::isalnum(c) != 0; };
  std::size_t begin = 0;
  std::size_t end = collapsed.size();
  while (begin < end && !is_kept(static_cast<unsigned char>(collapsed[begin])))
    ++begin;
  while (end > begin && !is_kept(static_cast<unsigned char>(collapsed[end - 1])))
    --end;
  if (begin == end)
    throw Error(ErrorCode::EmptyAfterNormalization,
                "nothing left of '" + std::string(raw) + "'");
  return collapsed.substr(begin, end - begin);
}

bool is_country_code(std::string_view code) noexcept {
  if (code.size() != 3) return false;
  return std::all_of(code.begin(), code.end(),
                     [](unsigned char c) { return c >= 'A' && c <= 'Z'; });
}

EventQuad make_event(std::string event_id, std::string_view subject,
                     std::string_view relation, std::string_view object,
                     Date timestamp, std::string country,
                     std::string context_id) {
  if (event_id.empty())
    throw Error(ErrorCode::InvalidArgument, "event_id must be non-empty");
  if (!is_country_code(country))
    throw Error(ErrorCode::InvalidArgument,
                "'" + country + "' is not a 3-letter uppercase country code");
  EventQuad quad;
  quad.event_id = std::move(event_id);
  quad.subject = normalize_entity(subject);
  quad.relation = normalize_entity(relation);
  quad.object = normalize_entity(object);
  quad.timestamp = timestamp;
  quad.country = std::move(country);
  quad.context_id = std::move(context_id);
  return quad;
}

EventHistory EventHistory::from_events(std::vector<EventQuad> events) {
  std::sort(events.begin(), events.end(),
            [](const EventQuad& a, const EventQuad& b) {
              if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
              return a.event_id < b.event_id;
            });
  EventHistory history;
  history.events_ = std::move(events);
  return history;
}

ForecastQuery make_query(const EventQuad& quad, EventHistory history) {
  for (const EventQuad& ev : history.events()) {
    if (!(ev.timestamp < quad.timestamp))
      throw Error(ErrorCode::HistoryNotPrior,
                  "history event " + ev.event_id + " dated " +
                      ev.timestamp.to_string() + " is not prior to " +
                      quad.timestamp.to_string());
  }
  ForecastQuery query;
  query.subject = quad.subject;
  query.relation = quad.relation;
  query.timestamp = quad.timestamp;
  query.country = quad.country;
  query.history = std::move(history);
  query.gold_object = quad.object;
  return query;
}

const char* to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::Routing: return "routing";
    case StrategyKind::MajorityVote: return "majority_vote";
    case StrategyKind::VanillaBestOfN: return "vanilla_bon";
    case StrategyKind::WeightedBestOfN: return "weighted_bon";
    case StrategyKind::Elite: return "elite";
  }
  return "unknown";
}

}  // namespace eventcast
