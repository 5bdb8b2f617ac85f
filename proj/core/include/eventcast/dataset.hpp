#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "eventcast/model.hpp"

namespace eventcast {

/// Maps a normalized name or alias to its entity id. Ids map to themselves.
using EntityRegistry = std::map<std::string, std::string>;

struct RejectedRecord {
  std::string raw;
  std::string reason;

  bool operator==(const RejectedRecord&) const = default;
};

/// Validated events plus the alias registry and the audit trail of rows
/// that failed validation.
struct EventStore {
  std::vector<EventQuad> events;
  EntityRegistry entity_registry;
  std::vector<RejectedRecord> rejects;
};

enum class SourceFormat { Tsv, Jsonl };

/// Parses "tsv" / "jsonl"; throws UnknownFormat otherwise.
SourceFormat parse_format(std::string_view name);

/// Reads line-delimited records. Valid rows become normalized EventQuads;
/// invalid rows land in rejects with a reason (BadColumnCount, BadDate,
/// BadCountry, MissingField, DuplicateId, BadJson). The registry maps both
/// ids and display names to entity ids.
EventStore ingest_events(std::istream& source, SourceFormat format);

/// File wrapper for ingest_events; throws SourceUnreadable.
EventStore ingest_file(const std::filesystem::path& path, SourceFormat format);

/// Collapses events identical in (s, r, o, t) to the one with the
/// lexicographically smallest event_id, keeping first-occurrence order.
/// Idempotent.
EventStore deduplicate(const EventStore& store);

/// Groups events into historical sequences. Events sharing a non-empty
/// context_id form one group keyed by that id. Contextless events are
/// grouped by connected components of the graph linking events that share
/// at least one entity and lie within window_days of each other; those
/// groups are keyed "auto:" + the smallest member event_id.
std::map<std::string, EventHistory> form_sequences(const EventStore& store,
                                                   int window_days);

struct CountryPartition {
  std::map<std::string, std::vector<EventQuad>> by_country;
  std::vector<std::string> selected_countries;
  std::vector<EventQuad> out_of_scope;
};

/// The 35 default partition codes: 17 Middle East + 18 G20.
const std::vector<std::string>& default_selected_countries();

CountryPartition partition_by_country(const EventStore& store,
                                      std::vector<std::string> selected);

struct SplitDataset {
  std::vector<EventQuad> train;
  std::vector<EventQuad> test;
  Date cutoff;
};

/// Default knowledge cutoff: 2023-12-31 (test = 2024 onward).
Date default_cutoff();

/// train = timestamp <= cutoff; test = timestamp > cutoff.
SplitDataset split_by_cutoff(const std::vector<EventQuad>& events, Date cutoff);

/// Builds one forecast query per target event: history = all events of the
/// target's sequence group strictly before the target's timestamp. Targets
/// without a group (unknown event id) get an empty history.
std::vector<ForecastQuery> build_queries(
    const std::map<std::string, EventHistory>& sequences,
    const std::vector<EventQuad>& targets);

/// Synthetic corpus generator configuration. Country vocabularies are a
/// deterministic function of the spec alone; randomness enters only through
/// the per-event draws. `separability` is the fraction of each country's
/// entity/relation vocabulary that is country-exclusive; the remainder is
/// drawn from a shared pool.
struct SyntheticSpec {
  std::vector<std::string> countries;
  int entities_per_country = 12;
  int relations_per_country = 6;
  int contexts_per_country = 8;
  int events = 1000;
  Date start_date;
  Date end_date;
  double separability = 1.0;
};

/// Country-conditional object distribution the generator samples from:
/// (entity id, probability) pairs, harmonically weighted by vocabulary rank.
std::vector<std::pair<std::string, double>> synthetic_object_distribution(
    const SyntheticSpec& spec, const std::string& country);

/// Entity / relation vocabulary for one country under the spec.
std::vector<std::string> synthetic_entity_vocabulary(const SyntheticSpec& spec,
                                                     const std::string& country);
std::vector<std::string> synthetic_relation_vocabulary(
    const SyntheticSpec& spec, const std::string& country);

/// Deterministic given (spec, seed). Throws InvalidSpec on empty
/// vocabularies, zero counts, or an invalid date range.
EventStore generate_synthetic_corpus(const SyntheticSpec& spec,
                                     std::uint64_t seed);

}  // namespace eventcast
