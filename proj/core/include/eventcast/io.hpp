#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eventcast/dataset.hpp"
#include "eventcast/evaluation.hpp"
#include "eventcast/experts.hpp"
#include "eventcast/model.hpp"
#include "eventcast/remote.hpp"
#include "eventcast/router.hpp"

namespace eventcast {

// ---------------------------------------------------------------------------
// Canonical JSON: each type serializes as a flat object with its field
// names; line-delimited files are UTF-8 with LF endings, one object per
// line. All *_from_* parsers throw DataInvalid on malformed input.
// ---------------------------------------------------------------------------

std::string event_to_json(const EventQuad& event);
EventQuad event_from_json(const std::string& text);

std::string query_to_json(const ForecastQuery& query);
ForecastQuery query_from_json(const std::string& text);

std::string prediction_to_json(const ExpertPrediction& prediction);
ExpertPrediction prediction_from_json(const std::string& text);

std::string forecast_to_json(const AggregatedForecast& forecast);

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

// line-delimited files
void write_events_jsonl(const std::filesystem::path& path,
                        std::span<const EventQuad> events);
std::vector<EventQuad> read_events_jsonl(const std::filesystem::path& path);

void write_queries_jsonl(const std::filesystem::path& path,
                         std::span<const ForecastQuery> queries);
std::vector<ForecastQuery> read_queries_jsonl(const std::filesystem::path& path);

void write_rejects_jsonl(const std::filesystem::path& path,
                         std::span<const RejectedRecord> rejects);

void write_registry_json(const std::filesystem::path& path,
                         const EntityRegistry& registry);
EntityRegistry read_registry_json(const std::filesystem::path& path);

void write_supervision_json(const std::filesystem::path& path,
                            const SupervisionSet& supervision);
SupervisionSet read_supervision_json(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// CSV rendering
// ---------------------------------------------------------------------------

/// (country, correct, total, accuracy) rows with trailing MICRO and MACRO
/// rows.
std::string report_to_csv(const EvaluationReport& report);

/// (k, micro, router_kind, seed) rows; seed renders as "mean" for a mean
/// curve.
std::string curve_to_csv(const KSweepCurve& curve);

// ---------------------------------------------------------------------------
// Configuration documents
// ---------------------------------------------------------------------------

StrategyKind strategy_kind_from_string(std::string_view name);

/// {"strategy": "elite", "k": 5, "inner": "weighted_bon"} and analogous
/// forms for the other kinds.
std::string strategy_to_json(const StrategyConfig& strategy);
StrategyConfig strategy_from_json(const std::string& text);

struct PanelEntryConfig {
  std::string expert_id;
  std::string backend;  // "mock" | "remote"
  std::set<std::string> home_countries;
  MockExpertProfile profile;       // mock backends
  RemoteEndpointConfig endpoint;   // remote backends
};

struct PanelConfig {
  std::vector<PanelEntryConfig> experts;
  PromptTemplate prompt = PromptTemplate::standard();
};

/// Shorthand: one mock specialist per country, ids "expert_<code>" and
/// per-expert seeds derived from the panel seed.
struct MockPanelSpec {
  std::vector<std::string> countries;
  double p_home = 0.7;
  double p_away = 0.1;
  double conf_correct_lo = 0.55;
  double conf_correct_hi = 0.95;
  double conf_wrong_lo = 0.05;
  double conf_wrong_hi = 0.60;
  std::uint64_t seed = 0;
};

PanelConfig materialize_mock_panel(const MockPanelSpec& spec);

/// Accepts either the explicit {"experts": [...]} form or the
/// {"mock_per_country": {...}} shorthand.
PanelConfig panel_config_from_json(const std::string& text);
std::string panel_config_to_json(const PanelConfig& config);

/// Instantiates backends. Mock experts draw candidates from `pools`;
/// remote experts match completions against `registry`.
ExpertPanel build_panel(const PanelConfig& config,
                        std::shared_ptr<const CandidatePools> pools,
                        std::shared_ptr<const EntityRegistry> registry);

SyntheticSpec synthetic_spec_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Small file helpers
// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace eventcast
