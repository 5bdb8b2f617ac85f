#include "eventcast/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace eventcast {
namespace {

using nlohmann::json;

constexpr const char* kColumns[] = {"event_id",  "date",     "subject_id",
                                    "subject_name", "relation", "object_id",
                                    "object_name",  "country",  "context_id"};
constexpr std::size_t kColumnCount = 9;

struct RawRecord {
  std::string event_id, date, subject_id, subject_name, relation, object_id,
      object_name, country, context_id;
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string uppercase(std::string s) {
  for (char& c : s)
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return s;
}

/// Validates one raw record; on success appends the event and registry
/// entries, otherwise records a reject with the given raw line.
void admit_record(const RawRecord& rec, const std::string& raw,
                  EventStore& store,
                  std::unordered_set<std::string>& seen_ids) {
  if (rec.event_id.empty() || rec.subject_id.empty() ||
      rec.relation.empty() || rec.object_id.empty()) {
    store.rejects.push_back({raw, "MissingField"});
    return;
  }
  if (seen_ids.contains(rec.event_id)) {
    store.rejects.push_back({raw, "DuplicateId"});
    return;
  }
  auto date = Date::parse(rec.date);
  if (!date) {
    store.rejects.push_back({raw, "BadDate"});
    return;
  }
  std::string country = uppercase(rec.country);
  if (!is_country_code(country)) {
    store.rejects.push_back({raw, "BadCountry"});
    return;
  }
  EventQuad quad;
  std::string subject_id, object_id, relation;
  try {
    subject_id = normalize_entity(rec.subject_id);
    object_id = normalize_entity(rec.object_id);
    relation = normalize_entity(rec.relation);
  } catch (const Error&) {
    store.rejects.push_back({raw, "EmptyAfterNormalization"});
    return;
  }
  quad.event_id = rec.event_id;
  quad.subject = subject_id;
  quad.relation = relation;
  quad.object = object_id;
  quad.timestamp = *date;
  quad.country = std::move(country);
  quad.context_id = rec.context_id;

  seen_ids.insert(quad.event_id);
  store.entity_registry[subject_id] = subject_id;
  store.entity_registry[object_id] = object_id;
  for (const auto& [name, id] :
       {std::pair{rec.subject_name, subject_id},
        std::pair{rec.object_name, object_id}}) {
    if (name.empty()) continue;
    try {
      store.entity_registry[normalize_entity(name)] = id;
    } catch (const Error&) {
      // unnormalizable display name: id mapping above still stands
    }
  }
  store.events.push_back(std::move(quad));
}

void ingest_tsv(std::istream& source, EventStore& store) {
  std::string line;
  if (!std::getline(source, line))
    throw Error(ErrorCode::DataInvalid, "missing TSV header row");
  auto header = split_tabs(strip_cr(line));
  if (header.size() != kColumnCount)
    throw Error(ErrorCode::DataInvalid,
                "expected " + std::to_string(kColumnCount) + " columns, got " +
                    std::to_string(header.size()));
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (header[i] != kColumns[i])
      throw Error(ErrorCode::DataInvalid,
                  "unexpected column '" + header[i] + "' at position " +
                      std::to_string(i));
  }
  std::unordered_set<std::string> seen_ids;
  while (std::getline(source, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != kColumnCount) {
      store.rejects.push_back({line, "BadColumnCount"});
      continue;
    }
    RawRecord rec{fields[0], fields[1], fields[2], fields[3], fields[4],
                  fields[5], fields[6], fields[7], fields[8]};
    admit_record(rec, line, store, seen_ids);
  }
}

std::string json_string_or(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return "";
  if (!it->is_string()) return "";
  return it->get<std::string>();
}

void ingest_jsonl(std::istream& source, EventStore& store) {
  std::unordered_set<std::string> seen_ids;
  std::string line;
  while (std::getline(source, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      store.rejects.push_back({line, "BadJson"});
      continue;
    }
    RawRecord rec;
    rec.event_id = json_string_or(j, "event_id");
    rec.date = json_string_or(j, "date");
    rec.subject_id = json_string_or(j, "subject_id");
    rec.subject_name = json_string_or(j, "subject_name");
    rec.relation = json_string_or(j, "relation");
    rec.object_id = json_string_or(j, "object_id");
    rec.object_name = json_string_or(j, "object_name");
    rec.country = json_string_or(j, "country");
    rec.context_id = json_string_or(j, "context_id");
    admit_record(rec, line, store, seen_ids);
  }
}

/// Union-find over event indices.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

SourceFormat parse_format(std::string_view name) {
  if (name == "tsv") return SourceFormat::Tsv;
  if (name == "jsonl") return SourceFormat::Jsonl;
  throw Error(ErrorCode::UnknownFormat, "'" + std::string(name) +
                                            "' (expected tsv or jsonl)");
}

EventStore ingest_events(std::istream& source, SourceFormat format) {
  EventStore store;
  switch (format) {
    case SourceFormat::Tsv: ingest_tsv(source, store); break;
    case SourceFormat::Jsonl: ingest_jsonl(source, store); break;
  }
  return store;
}

EventStore ingest_file(const std::filesystem::path& path, SourceFormat format) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::SourceUnreadable, path.string());
  return ingest_events(in, format);
}

EventStore deduplicate(const EventStore& store) {
  // key (s, r, o, t) -> position of the retained event in `out.events`
  std::map<std::tuple<std::string, std::string, std::string, std::int32_t>,
           std::size_t>
      retained;
  EventStore out;
  out.entity_registry = store.entity_registry;
  out.rejects = store.rejects;
  for (const EventQuad& ev : store.events) {
    auto key = std::make_tuple(ev.subject, ev.relation, ev.object,
                               ev.timestamp.serial());
    auto it = retained.find(key);
    if (it == retained.end()) {
      retained.emplace(key, out.events.size());
      out.events.push_back(ev);
    } else if (ev.event_id < out.events[it->second].event_id) {
      out.events[it->second] = ev;
    }
  }
  return out;
}

std::map<std::string, EventHistory> form_sequences(const EventStore& store,
                                                   int window_days) {
  if (window_days < 1)
    throw Error(ErrorCode::ConfigInvalid, "window_days must be >= 1");

  const auto& events = store.events;
  std::map<std::string, std::vector<EventQuad>> groups;

  // Explicit context ids first.
  std::vector<std::size_t> loose;  // indices of contextless events
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!events[i].context_id.empty())
      groups[events[i].context_id].push_back(events[i]);
    else
      loose.push_back(i);
  }

  // Fallback: connected components over entity-sharing events within the
  // window. Per entity, linking consecutive events (by date) whose gap is
  // within the window yields the same components as linking all pairs.
  DisjointSets sets(loose.size());
  std::unordered_map<std::string, std::vector<std::size_t>> by_entity;
  for (std::size_t li = 0; li < loose.size(); ++li) {
    const EventQuad& ev = events[loose[li]];
    by_entity[ev.subject].push_back(li);
    if (ev.object != ev.subject) by_entity[ev.object].push_back(li);
  }
  for (auto& [entity, members] : by_entity) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) {
                return events[loose[a]].timestamp < events[loose[b]].timestamp;
              });
    for (std::size_t i = 1; i < members.size(); ++i) {
      const EventQuad& prev = events[loose[members[i - 1]]];
      const EventQuad& cur = events[loose[members[i]]];
      if (day_distance(cur.timestamp, prev.timestamp) <= window_days)
        sets.unite(members[i - 1], members[i]);
    }
  }
  std::unordered_map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t li = 0; li < loose.size(); ++li)
    components[sets.find(li)].push_back(li);
  for (const auto& [root, members] : components) {
    std::string smallest_id;
    std::vector<EventQuad> group;
    group.reserve(members.size());
    for (std::size_t li : members) {
      const EventQuad& ev = events[loose[li]];
      if (smallest_id.empty() || ev.event_id < smallest_id)
        smallest_id = ev.event_id;
      group.push_back(ev);
    }
    groups["auto:" + smallest_id] = std::move(group);
  }

  std::map<std::string, EventHistory> result;
  for (auto& [key, group] : groups)
    result.emplace(key, EventHistory::from_events(std::move(group)));
  return result;
}

const std::vector<std::string>& default_selected_countries() {
  static const std::vector<std::string> kCountries = {
      // Middle East
      "IRN", "ISR", "EGY", "SAU", "TUR", "IRQ", "YEM", "SYR", "JOR", "ARE",
      "LBN", "OMN", "KWT", "QAT", "BHR", "CYP", "PSE",
      // Global (G20)
      "CHN", "USA", "RUS", "GBR", "FRA", "DEU", "KOR", "JPN", "IND", "CAN",
      "ITA", "AUS", "ESP", "ARG", "BRA", "IDN", "MEX", "ZAF"};
  return kCountries;
}

CountryPartition partition_by_country(const EventStore& store,
                                      std::vector<std::string> selected) {
  if (selected.empty())
    throw Error(ErrorCode::ConfigInvalid, "selected country list is empty");
  CountryPartition partition;
  partition.selected_countries = std::move(selected);
  std::set<std::string> allowed(partition.selected_countries.begin(),
                                partition.selected_countries.end());
  for (const EventQuad& ev : store.events) {
    if (allowed.contains(ev.country))
      partition.by_country[ev.country].push_back(ev);
    else
      partition.out_of_scope.push_back(ev);
  }
  return partition;
}

Date default_cutoff() { return *Date::parse("2023-12-31"); }

SplitDataset split_by_cutoff(const std::vector<EventQuad>& events,
                             Date cutoff) {
  SplitDataset split;
  split.cutoff = cutoff;
  for (const EventQuad& ev : events) {
    if (ev.timestamp <= cutoff)
      split.train.push_back(ev);
    else
      split.test.push_back(ev);
  }
  return split;
}

std::vector<ForecastQuery> build_queries(
    const std::map<std::string, EventHistory>& sequences,
    const std::vector<EventQuad>& targets) {
  std::unordered_map<std::string, const EventHistory*> group_of;
  for (const auto& [key, history] : sequences)
    for (const EventQuad& ev : history.events()) group_of[ev.event_id] = &history;

  std::vector<ForecastQuery> queries;
  queries.reserve(targets.size());
  for (const EventQuad& target : targets) {
    std::vector<EventQuad> prior;
    auto it = group_of.find(target.event_id);
    if (it != group_of.end()) {
      for (const EventQuad& ev : it->second->events())
        if (ev.timestamp < target.timestamp) prior.push_back(ev);
    }
    queries.push_back(make_query(target, EventHistory::from_events(std::move(prior))));
  }
  return queries;
}

}  // namespace eventcast
