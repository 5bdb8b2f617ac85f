#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "eventcast/dataset.hpp"
#include "eventcast/rng.hpp"
#include "test_support.hpp"

using namespace eventcast;
using namespace eventcast::test;

namespace {

constexpr const char* kHeader =
    "event_id\tdate\tsubject_id\tsubject_name\trelation\tobject_id\t"
    "object_name\tcountry\tcontext_id\n";

EventStore ingest_text(const std::string& body,
                       SourceFormat format = SourceFormat::Tsv) {
  std::istringstream in(format == SourceFormat::Tsv ? kHeader + body : body);
  return ingest_events(in, format);
}

EventStore store_of(std::vector<EventQuad> events) {
  EventStore store;
  for (const EventQuad& ev : events) {
    store.entity_registry[ev.subject] = ev.subject;
    store.entity_registry[ev.object] = ev.object;
  }
  store.events = std::move(events);
  return store;
}

/// Brute-force oracle for the fallback grouping: connected components over
/// all event pairs that share an entity and lie within the window.
std::vector<std::set<std::string>> cc_oracle(const std::vector<EventQuad>& events,
                                             int window_days) {
  const std::size_t n = events.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool share = events[i].subject == events[j].subject ||
                         events[i].subject == events[j].object ||
                         events[i].object == events[j].subject ||
                         events[i].object == events[j].object;
      if (!share) continue;
      if (day_distance(events[i].timestamp, events[j].timestamp) > window_days)
        continue;
      parent[find(i)] = find(j);
    }
  std::map<std::size_t, std::set<std::string>> components;
  for (std::size_t i = 0; i < n; ++i)
    components[find(i)].insert(events[i].event_id);
  std::vector<std::set<std::string>> out;
  for (auto& [root, ids] : components) out.push_back(std::move(ids));
  return out;
}

std::vector<std::set<std::string>> groups_as_sets(
    const std::map<std::string, EventHistory>& sequences) {
  std::vector<std::set<std::string>> out;
  for (const auto& [key, history] : sequences) {
    std::set<std::string> ids;
    for (const EventQuad& ev : history.events()) ids.insert(ev.event_id);
    out.push_back(std::move(ids));
  }
  return out;
}

bool same_partition(std::vector<std::set<std::string>> a,
                    std::vector<std::set<std::string>> b) {
  auto cmp = [](const std::set<std::string>& x, const std::set<std::string>& y) {
    return *x.begin() < *y.begin();
  };
  std::sort(a.begin(), a.end(), cmp);
  std::sort(b.begin(), b.end(), cmp);
  return a == b;
}

}  // namespace

TEST_CASE("ingest parses well-formed TSV rows") {
  auto store = ingest_text(
      "e1\t2024-01-05\tISR_GOV\tIsrael Gov\tCONSULT\tEGY_GOV\tEgypt Gov\tISR\tc1\n");
  REQUIRE(store.events.size() == 1);
  const EventQuad& ev = store.events[0];
  CHECK(ev.subject == "isr_gov");
  CHECK(ev.relation == "consult");
  CHECK(ev.object == "egy_gov");
  CHECK(ev.country == "ISR");
  CHECK(ev.context_id == "c1");
  CHECK(store.entity_registry.at("israel gov") == "isr_gov");
  CHECK(store.entity_registry.at("egypt gov") == "egy_gov");
  CHECK(store.entity_registry.at("isr_gov") == "isr_gov");
}

TEST_CASE("ingest rejects invalid rows with reasons") {
  auto store = ingest_text(
      "e1\t2024-13-40\ta\tA\tr\tb\tB\tISR\t\n"
      "e2\t2024-01-05\ta\tA\tr\tb\tB\tISR\t\n"
      "e2\t2024-01-06\tc\tC\tr\td\tD\tEGY\t\n"
      "e3\t2024-01-05\ta\tA\tr\tb\tB\tisrael\t\n"
      "e4\t2024-01-05\t\tA\tr\tb\tB\tISR\t\n"
      "short\trow\n");
  CHECK(store.events.size() == 1);
  REQUIRE(store.rejects.size() == 5);
  CHECK(store.rejects[0].reason == "BadDate");
  CHECK(store.rejects[1].reason == "DuplicateId");
  CHECK(store.rejects[2].reason == "BadCountry");
  CHECK(store.rejects[3].reason == "MissingField");
  CHECK(store.rejects[4].reason == "BadColumnCount");
}

TEST_CASE("ingest reads the JSONL alternative with the same field names") {
  auto store = ingest_text(
      R"({"event_id":"e1","date":"2024-01-05","subject_id":"ISR_GOV","subject_name":"Israel Gov","relation":"CONSULT","object_id":"EGY_GOV","object_name":"Egypt Gov","country":"isr","context_id":"c1"})"
      "\n"
      "{not json}\n",
      SourceFormat::Jsonl);
  REQUIRE(store.events.size() == 1);
  CHECK(store.events[0].country == "ISR");  // case-normalized
  REQUIRE(store.rejects.size() == 1);
  CHECK(store.rejects[0].reason == "BadJson");
}

TEST_CASE("parse_format rejects unknown names") {
  CHECK(parse_format("tsv") == SourceFormat::Tsv);
  CHECK(parse_format("jsonl") == SourceFormat::Jsonl);
  try {
    parse_format("csv");
    FAIL("expected UnknownFormat");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownFormat);
  }
}

TEST_CASE("ingest_file reports unreadable sources") {
  try {
    ingest_file("/nonexistent/events.tsv", SourceFormat::Tsv);
    FAIL("expected SourceUnreadable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SourceUnreadable);
  }
}

TEST_CASE("deduplicate keeps the lexicographically smallest event id") {
  auto store = store_of({
      quad("e5", "a", "r", "b", "2024-01-05"),
      quad("e2", "a", "r", "b", "2024-01-05"),
      quad("e3", "a", "r", "b", "2024-01-06"),  // different date: retained
  });
  auto deduped = deduplicate(store);
  REQUIRE(deduped.events.size() == 2);
  CHECK(deduped.events[0].event_id == "e2");
  CHECK(deduped.events[1].event_id == "e3");
}

TEST_CASE("deduplicate is idempotent and never grows on a 50-event fixture") {
  SplitMix64 rng(7);
  std::vector<EventQuad> events;
  for (int i = 0; i < 50; ++i) {
    const int s = static_cast<int>(rng.next_below(4));
    const int o = static_cast<int>(rng.next_below(4));
    const int d = static_cast<int>(rng.next_below(3));
    events.push_back(quad(("e" + std::to_string(i)).c_str(),
                          ("s" + std::to_string(s)).c_str(), "rel",
                          ("o" + std::to_string(o)).c_str(),
                          d == 0   ? "2024-01-01"
                          : d == 1 ? "2024-01-02"
                                   : "2024-01-03"));
  }
  auto once = deduplicate(store_of(events));
  auto twice = deduplicate(once);
  CHECK(once.events.size() <= events.size());
  CHECK(once.events == twice.events);
}

TEST_CASE("form_sequences groups by explicit context id") {
  auto store = store_of({
      quad("e1", "a", "r", "b", "2024-01-05", "ISR", "C1"),
      quad("e2", "c", "r", "d", "2024-02-05", "ISR", "C1"),
  });
  auto sequences = form_sequences(store, 7);
  REQUIRE(sequences.size() == 1);
  CHECK(sequences.at("C1").size() == 2);
}

TEST_CASE("fallback linking is transitive within the window") {
  // A-B share x (3 days apart), B-C share y (5 days apart): one component.
  auto store = store_of({
      quad("a", "x", "r", "p", "2024-01-01"),
      quad("b", "x", "r", "y", "2024-01-04"),
      quad("c", "y", "r", "q", "2024-01-09"),
  });
  auto sequences = form_sequences(store, 7);
  REQUIRE(sequences.size() == 1);
  CHECK(sequences.at("auto:a").size() == 3);
  CHECK(same_partition(groups_as_sets(sequences), cc_oracle(store.events, 7)));
}

TEST_CASE("fallback linking respects the window") {
  auto store = store_of({
      quad("a", "x", "r", "p", "2024-01-01"),
      quad("b", "x", "r", "q", "2024-01-11"),  // 10 days apart
  });
  auto sequences = form_sequences(store, 7);
  CHECK(sequences.size() == 2);
}

TEST_CASE("form_sequences matches the brute-force component oracle") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(40));
    const int window = 1 + static_cast<int>(rng.next_below(14));
    std::vector<EventQuad> events;
    for (int i = 0; i < n; ++i) {
      const int entity_pool = 6;
      std::string s = "s" + std::to_string(rng.next_below(entity_pool));
      std::string o = "o" + std::to_string(rng.next_below(entity_pool));
      events.push_back(
          quad(("e" + std::to_string(i)).c_str(), s.c_str(), "rel", o.c_str(),
               add_days(date("2024-01-01"),
                        static_cast<int>(rng.next_below(40)))
                   .to_string()
                   .c_str()
                   ));
    }
    auto store = store_of(events);
    auto sequences = form_sequences(store, window);
    CHECK(same_partition(groups_as_sets(sequences),
                         cc_oracle(store.events, window)));
    // every event lands in exactly one group
    std::size_t total = 0;
    for (const auto& [key, history] : sequences) total += history.size();
    CHECK(total == events.size());
  }
}

TEST_CASE("partition_by_country groups selected codes and buckets the rest") {
  auto store = store_of({
      quad("e1", "a", "r", "b", "2024-01-01", "ISR"),
      quad("e2", "c", "r", "d", "2024-01-02", "ISR"),
      quad("e3", "e", "r", "f", "2024-01-03", "EGY"),
      quad("e4", "g", "r", "h", "2024-01-04", "ATA"),
  });
  auto partition = partition_by_country(store, default_selected_countries());
  CHECK(partition.by_country.at("ISR").size() == 2);
  CHECK(partition.by_country.at("EGY").size() == 1);
  REQUIRE(partition.out_of_scope.size() == 1);
  CHECK(partition.out_of_scope[0].country == "ATA");

  std::size_t in_partitions = 0;
  for (const auto& [country, events] : partition.by_country)
    in_partitions += events.size();
  CHECK(in_partitions + partition.out_of_scope.size() == store.events.size());
}

TEST_CASE("the default country list is the 17 + 18 = 35 codes") {
  const auto& countries = default_selected_countries();
  CHECK(countries.size() == 35);
  const std::set<std::string> unique(countries.begin(), countries.end());
  CHECK(unique.size() == 35);
  for (const char* me : {"IRN", "ISR", "EGY", "SAU", "TUR", "IRQ", "YEM",
                         "SYR", "JOR", "ARE", "LBN", "OMN", "KWT", "QAT",
                         "BHR", "CYP", "PSE"})
    CHECK(unique.contains(me));
  for (const char* g20 : {"CHN", "USA", "RUS", "GBR", "FRA", "DEU", "KOR",
                          "JPN", "IND", "CAN", "ITA", "AUS", "ESP", "ARG",
                          "BRA", "IDN", "MEX", "ZAF"})
    CHECK(unique.contains(g20));
}

TEST_CASE("partition requires a non-empty selection") {
  CHECK_THROWS_AS(partition_by_country(store_of({}), {}), Error);
}

TEST_CASE("split_by_cutoff honors the boundary") {
  std::vector<EventQuad> events = {
      quad("e1", "a", "r", "b", "2023-12-15"),
      quad("e2", "c", "r", "d", "2023-12-31"),
      quad("e3", "e", "r", "f", "2024-01-01"),
  };
  auto split = split_by_cutoff(events, default_cutoff());
  REQUIRE(split.train.size() == 2);
  REQUIRE(split.test.size() == 1);
  CHECK(split.train[1].event_id == "e2");  // boundary date goes to train
  CHECK(split.test[0].event_id == "e3");
}

TEST_CASE("split_by_cutoff on empty input yields empty halves") {
  auto split = split_by_cutoff({}, default_cutoff());
  CHECK(split.train.empty());
  CHECK(split.test.empty());
}

TEST_CASE("split is a disjoint union over random fixtures") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EventQuad> events;
    const int n = static_cast<int>(rng.next_below(60));
    for (int i = 0; i < n; ++i)
      events.push_back(quad(("e" + std::to_string(i)).c_str(), "a", "r", "b",
                            add_days(date("2023-11-01"),
                                     static_cast<int>(rng.next_below(120)))
                                .to_string()
                                .c_str()));
    auto split = split_by_cutoff(events, default_cutoff());
    CHECK(split.train.size() + split.test.size() == events.size());
    for (const EventQuad& ev : split.train)
      CHECK(ev.timestamp <= default_cutoff());
    for (const EventQuad& ev : split.test)
      CHECK(ev.timestamp > default_cutoff());
  }
}

TEST_CASE("build_queries attaches strictly prior group history") {
  auto store = store_of({
      quad("e1", "x", "r", "p", "2024-01-01", "ISR", "C1"),
      quad("e2", "x", "r", "q", "2024-01-05", "ISR", "C1"),
      quad("e3", "x", "r", "s", "2024-01-05", "ISR", "C1"),  // same day as e2
  });
  auto sequences = form_sequences(store, 7);
  auto queries = build_queries(sequences, {store.events[1]});
  REQUIRE(queries.size() == 1);
  // only e1 is strictly earlier; the same-day e3 is excluded
  REQUIRE(queries[0].history.size() == 1);
  CHECK(queries[0].history.events()[0].event_id == "e1");
  CHECK(queries[0].gold_object == "q");
}
