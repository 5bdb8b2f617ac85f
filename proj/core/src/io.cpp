#include "eventcast/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eventcast/rng.hpp"

namespace eventcast {
namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::DataInvalid, what);
}

json parse_json(const std::string& text, const char* what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) malformed(std::string(what) + ": not valid JSON");
  return doc;
}

Date parse_date_field(const json& j, const char* key) {
  auto date = Date::parse(j.at(key).get<std::string>());
  if (!date) malformed(std::string(key) + " is not a calendar date");
  return *date;
}

json event_to_json_obj(const EventQuad& event) {
  return json{{"event_id", event.event_id},
              {"subject", event.subject},
              {"relation", event.relation},
              {"object", event.object},
              {"timestamp", event.timestamp.to_string()},
              {"country", event.country},
              {"context_id", event.context_id}};
}

EventQuad event_from_json_obj(const json& j) {
  try {
    EventQuad event;
    event.event_id = j.at("event_id").get<std::string>();
    event.subject = j.at("subject").get<std::string>();
    event.relation = j.at("relation").get<std::string>();
    event.object = j.at("object").get<std::string>();
    event.timestamp = parse_date_field(j, "timestamp");
    event.country = j.at("country").get<std::string>();
    event.context_id = j.value("context_id", std::string());
    return event;
  } catch (const json::exception& e) {
    malformed(std::string("event record: ") + e.what());
  }
}

json query_to_json_obj(const ForecastQuery& query) {
  json history = json::array();
  for (const EventQuad& ev : query.history.events())
    history.push_back(event_to_json_obj(ev));
  return json{{"subject", query.subject},
              {"relation", query.relation},
              {"timestamp", query.timestamp.to_string()},
              {"country", query.country},
              {"history", std::move(history)},
              {"gold_object", query.gold_object}};
}

ForecastQuery query_from_json_obj(const json& j) {
  try {
    ForecastQuery query;
    query.subject = j.at("subject").get<std::string>();
    query.relation = j.at("relation").get<std::string>();
    query.timestamp = parse_date_field(j, "timestamp");
    query.country = j.at("country").get<std::string>();
    query.gold_object = j.at("gold_object").get<std::string>();
    std::vector<EventQuad> events;
    for (const json& ev : j.at("history"))
      events.push_back(event_from_json_obj(ev));
    query.history = EventHistory::from_events(std::move(events));
    return query;
  } catch (const json::exception& e) {
    malformed(std::string("query record: ") + e.what());
  }
}

std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

json strategy_to_json_obj(const StrategyConfig& strategy) {
  json j{{"strategy", to_string(strategy.kind)}};
  if (strategy.kind == StrategyKind::Elite) {
    j["k"] = strategy.k;
    j["inner"] = to_string(strategy.inner);
  }
  return j;
}

StrategyConfig strategy_from_json_obj(const json& j) {
  try {
    StrategyConfig strategy;
    strategy.kind = strategy_kind_from_string(j.at("strategy").get<std::string>());
    if (strategy.kind == StrategyKind::Elite) {
      strategy.k = j.at("k").get<int>();
      strategy.inner =
          strategy_kind_from_string(j.at("inner").get<std::string>());
      if (strategy.inner == StrategyKind::Elite ||
          strategy.inner == StrategyKind::Routing)
        throw Error(ErrorCode::ConfigInvalid,
                    "elite inner strategy must be a wisdom strategy");
      if (strategy.k < 1)
        throw Error(ErrorCode::ConfigInvalid, "elite k must be >= 1");
    }
    return strategy;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid,
                std::string("strategy config: ") + e.what());
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SourceUnreadable, path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::SourceUnreadable, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string event_to_json(const EventQuad& event) {
  return event_to_json_obj(event).dump();
}

EventQuad event_from_json(const std::string& text) {
  return event_from_json_obj(parse_json(text, "event record"));
}

std::string query_to_json(const ForecastQuery& query) {
  return query_to_json_obj(query).dump();
}

ForecastQuery query_from_json(const std::string& text) {
  return query_from_json_obj(parse_json(text, "query record"));
}

std::string prediction_to_json(const ExpertPrediction& prediction) {
  return json{{"expert_id", prediction.expert_id},
              {"object", prediction.object},
              {"confidence", prediction.confidence}}
      .dump();
}

ExpertPrediction prediction_from_json(const std::string& text) {
  json j = parse_json(text, "expert prediction");
  try {
    ExpertPrediction prediction;
    prediction.expert_id = j.at("expert_id").get<std::string>();
    prediction.object = j.at("object").get<std::string>();
    prediction.confidence = j.at("confidence").get<double>();
    if (prediction.confidence < 0.0 || prediction.confidence > 1.0)
      malformed("confidence outside [0, 1]");
    return prediction;
  } catch (const json::exception& e) {
    malformed(std::string("expert prediction: ") + e.what());
  }
}

std::string forecast_to_json(const AggregatedForecast& forecast) {
  json scores = json::object();
  for (const auto& [object, score] : forecast.score_table)
    scores[object] = score;
  return json{{"object", forecast.object},
              {"strategy", to_string(forecast.strategy)},
              {"score_table", std::move(scores)},
              {"contributing_experts", forecast.contributing_experts}}
      .dump();
}

std::string report_to_json(const EvaluationReport& report) {
  json per_country = json::object();
  for (const auto& [country, tally] : report.per_country)
    per_country[country] = json{{"correct", tally.correct},
                                {"total", tally.total},
                                {"accuracy", tally.accuracy()}};
  return json{{"strategy", strategy_to_json_obj(report.strategy)},
              {"seed", report.seed},
              {"query_count", report.query_count},
              {"backend_calls", report.backend_calls},
              {"micro", report.micro},
              {"macro", report.macro},
              {"per_country", std::move(per_country)}}
      .dump();
}

EvaluationReport report_from_json(const std::string& text) {
  json doc = parse_json(text, "evaluation report");
  try {
    EvaluationReport report;
    report.strategy = strategy_from_json_obj(doc.at("strategy"));
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.query_count = doc.at("query_count").get<std::uint64_t>();
    report.backend_calls = doc.at("backend_calls").get<std::uint64_t>();
    report.micro = doc.at("micro").get<double>();
    report.macro = doc.at("macro").get<double>();
    for (const auto& [country, tally] : doc.at("per_country").items()) {
      report.per_country[country] = {tally.at("correct").get<std::uint64_t>(),
                                     tally.at("total").get<std::uint64_t>()};
    }
    return report;
  } catch (const json::exception& e) {
    malformed(std::string("evaluation report: ") + e.what());
  }
}

void write_events_jsonl(const std::filesystem::path& path,
                        std::span<const EventQuad> events) {
  auto out = open_out(path);
  for (const EventQuad& ev : events) out << event_to_json(ev) << '\n';
}

std::vector<EventQuad> read_events_jsonl(const std::filesystem::path& path) {
  std::vector<EventQuad> events;
  for (const std::string& line : read_lines(path))
    events.push_back(event_from_json(line));
  return events;
}

void write_queries_jsonl(const std::filesystem::path& path,
                         std::span<const ForecastQuery> queries) {
  auto out = open_out(path);
  for (const ForecastQuery& q : queries) out << query_to_json(q) << '\n';
}

std::vector<ForecastQuery> read_queries_jsonl(
    const std::filesystem::path& path) {
  std::vector<ForecastQuery> queries;
  for (const std::string& line : read_lines(path))
    queries.push_back(query_from_json(line));
  return queries;
}

void write_rejects_jsonl(const std::filesystem::path& path,
                         std::span<const RejectedRecord> rejects) {
  auto out = open_out(path);
  for (const RejectedRecord& r : rejects)
    out << json{{"raw", r.raw}, {"reason", r.reason}}.dump() << '\n';
}

void write_registry_json(const std::filesystem::path& path,
                         const EntityRegistry& registry) {
  json doc = json::object();
  for (const auto& [alias, id] : registry) doc[alias] = id;
  open_out(path) << doc.dump() << '\n';
}

EntityRegistry read_registry_json(const std::filesystem::path& path) {
  json doc = parse_json(read_text_file(path), "entity registry");
  EntityRegistry registry;
  for (const auto& [alias, id] : doc.items()) {
    if (!id.is_string()) malformed("entity registry: non-string id");
    registry[alias] = id.get<std::string>();
  }
  return registry;
}

void write_supervision_json(const std::filesystem::path& path,
                            const SupervisionSet& supervision) {
  json examples = json::array();
  for (const SupervisionExample& ex : supervision.examples) {
    json features = json::array();
    for (const auto& [index, value] : ex.features.entries)
      features.push_back(json::array({index, value}));
    examples.push_back(json{
        {"features", std::move(features)},
        {"positives", std::vector<std::string>(ex.positive_experts.begin(),
                                               ex.positive_experts.end())}});
  }
  json doc{{"version", 1},
           {"dim", supervision.dim},
           {"horizon", supervision.horizon},
           {"expert_ids", supervision.expert_ids},
           {"skipped", supervision.skipped},
           {"examples", std::move(examples)}};
  open_out(path) << doc.dump() << '\n';
}

SupervisionSet read_supervision_json(const std::filesystem::path& path) {
  json doc = parse_json(read_text_file(path), "supervision set");
  try {
    SupervisionSet set;
    set.dim = doc.at("dim").get<std::uint32_t>();
    set.horizon = doc.at("horizon").get<int>();
    set.expert_ids = doc.at("expert_ids").get<std::vector<std::string>>();
    set.skipped = doc.at("skipped").get<std::size_t>();
    for (const json& ex : doc.at("examples")) {
      SupervisionExample example;
      for (const json& pair : ex.at("features"))
        example.features.entries.emplace_back(pair.at(0).get<std::uint32_t>(),
                                              pair.at(1).get<double>());
      for (const json& id : ex.at("positives"))
        example.positive_experts.insert(id.get<std::string>());
      if (example.positive_experts.empty())
        malformed("supervision example with empty positive set");
      set.examples.push_back(std::move(example));
    }
    return set;
  } catch (const json::exception& e) {
    malformed(std::string("supervision set: ") + e.what());
  }
}

std::string report_to_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "country,correct,total,accuracy\n";
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  for (const auto& [country, tally] : report.per_country) {
    out << country << ',' << tally.correct << ',' << tally.total << ','
        << format_double(tally.accuracy()) << '\n';
    correct += tally.correct;
    total += tally.total;
  }
  out << "MICRO," << correct << ',' << total << ','
      << format_double(report.micro) << '\n';
  out << "MACRO,,," << format_double(report.macro) << '\n';
  return out.str();
}

std::string curve_to_csv(const KSweepCurve& curve) {
  std::ostringstream out;
  out << "k,micro,router_kind,seed\n";
  const std::string kind = curve.trained_router ? "trained" : "untrained";
  const std::string seed =
      curve.seed ? std::to_string(*curve.seed) : std::string("mean");
  for (const KSweepPoint& point : curve.points)
    out << point.k << ',' << format_double(point.micro) << ',' << kind << ','
        << seed << '\n';
  return out.str();
}

StrategyKind strategy_kind_from_string(std::string_view name) {
  if (name == "routing") return StrategyKind::Routing;
  if (name == "majority_vote") return StrategyKind::MajorityVote;
  if (name == "vanilla_bon") return StrategyKind::VanillaBestOfN;
  if (name == "weighted_bon") return StrategyKind::WeightedBestOfN;
  if (name == "elite") return StrategyKind::Elite;
  throw Error(ErrorCode::ConfigInvalid,
              "unknown strategy '" + std::string(name) + "'");
}

std::string strategy_to_json(const StrategyConfig& strategy) {
  return strategy_to_json_obj(strategy).dump();
}

StrategyConfig strategy_from_json(const std::string& text) {
  return strategy_from_json_obj(parse_json(text, "strategy config"));
}

PanelConfig materialize_mock_panel(const MockPanelSpec& spec) {
  if (spec.countries.empty())
    throw Error(ErrorCode::ConfigInvalid, "mock panel needs countries");
  PanelConfig config;
  for (std::size_t i = 0; i < spec.countries.size(); ++i) {
    const std::string& country = spec.countries[i];
    if (!is_country_code(country))
      throw Error(ErrorCode::ConfigInvalid,
                  "bad country code '" + country + "'");
    PanelEntryConfig entry;
    std::string lower = country;
    for (char& c : lower) c = static_cast<char>(std::tolower(c));
    entry.expert_id = "expert_" + lower;
    entry.backend = "mock";
    entry.home_countries = {country};
    entry.profile.home_countries = {country};
    entry.profile.p_home = spec.p_home;
    entry.profile.p_away = spec.p_away;
    entry.profile.conf_correct_lo = spec.conf_correct_lo;
    entry.profile.conf_correct_hi = spec.conf_correct_hi;
    entry.profile.conf_wrong_lo = spec.conf_wrong_lo;
    entry.profile.conf_wrong_hi = spec.conf_wrong_hi;
    entry.profile.seed = mix64(spec.seed, i);
    validate_profile(entry.profile);
    config.experts.push_back(std::move(entry));
  }
  return config;
}

namespace {

PanelEntryConfig panel_entry_from_json(const json& j) {
  PanelEntryConfig entry;
  entry.expert_id = j.at("expert_id").get<std::string>();
  entry.backend = j.at("backend").get<std::string>();
  for (const json& c : j.value("home_countries", json::array()))
    entry.home_countries.insert(c.get<std::string>());
  if (entry.backend == "mock") {
    entry.profile.home_countries = entry.home_countries;
    entry.profile.p_home = j.at("p_home").get<double>();
    entry.profile.p_away = j.at("p_away").get<double>();
    if (auto it = j.find("conf_correct"); it != j.end()) {
      entry.profile.conf_correct_lo = it->at(0).get<double>();
      entry.profile.conf_correct_hi = it->at(1).get<double>();
    }
    if (auto it = j.find("conf_wrong"); it != j.end()) {
      entry.profile.conf_wrong_lo = it->at(0).get<double>();
      entry.profile.conf_wrong_hi = it->at(1).get<double>();
    }
    entry.profile.seed = j.at("seed").get<std::uint64_t>();
    validate_profile(entry.profile);
  } else if (entry.backend == "remote") {
    entry.endpoint.endpoint = j.at("endpoint").get<std::string>();
    const std::string profile = j.value("profile", std::string("native"));
    if (profile == "native")
      entry.endpoint.profile = RemoteEndpointConfig::Profile::Native;
    else if (profile == "chat")
      entry.endpoint.profile = RemoteEndpointConfig::Profile::Chat;
    else
      throw Error(ErrorCode::ConfigInvalid,
                  "unknown endpoint profile '" + profile + "'");
    entry.endpoint.timeout_ms = j.value("timeout_ms", 5000);
    entry.endpoint.retries = j.value("retries", 0);
    entry.endpoint.max_tokens = j.value("max_tokens", 32);
    entry.endpoint.model = j.value("model", std::string());
  } else {
    throw Error(ErrorCode::ConfigInvalid,
                "unknown backend '" + entry.backend + "'");
  }
  return entry;
}

json panel_entry_to_json(const PanelEntryConfig& entry) {
  json j{{"expert_id", entry.expert_id},
         {"backend", entry.backend},
         {"home_countries",
          std::vector<std::string>(entry.home_countries.begin(),
                                   entry.home_countries.end())}};
  if (entry.backend == "mock") {
    j["p_home"] = entry.profile.p_home;
    j["p_away"] = entry.profile.p_away;
    j["conf_correct"] =
        json::array({entry.profile.conf_correct_lo, entry.profile.conf_correct_hi});
    j["conf_wrong"] =
        json::array({entry.profile.conf_wrong_lo, entry.profile.conf_wrong_hi});
    j["seed"] = entry.profile.seed;
  } else {
    j["endpoint"] = entry.endpoint.endpoint;
    j["profile"] = entry.endpoint.profile == RemoteEndpointConfig::Profile::Native
                       ? "native"
                       : "chat";
    j["timeout_ms"] = entry.endpoint.timeout_ms;
    j["retries"] = entry.endpoint.retries;
    j["max_tokens"] = entry.endpoint.max_tokens;
    j["model"] = entry.endpoint.model;
  }
  return j;
}

PromptTemplate prompt_from_json(const json& j) {
  PromptTemplate tmpl = PromptTemplate::standard();
  tmpl.role_preamble = j.value("role_preamble", tmpl.role_preamble);
  tmpl.history_line_format =
      j.value("history_line_format", tmpl.history_line_format);
  tmpl.query_line_format = j.value("query_line_format", tmpl.query_line_format);
  tmpl.max_history = j.value("max_history", tmpl.max_history);
  validate_template(tmpl);
  return tmpl;
}

}  // namespace

PanelConfig panel_config_from_json(const std::string& text) {
  json doc = parse_json(text, "panel config");
  try {
    if (auto it = doc.find("mock_per_country"); it != doc.end()) {
      MockPanelSpec spec;
      spec.countries = it->at("countries").get<std::vector<std::string>>();
      spec.p_home = it->value("p_home", spec.p_home);
      spec.p_away = it->value("p_away", spec.p_away);
      if (auto c = it->find("conf_correct"); c != it->end()) {
        spec.conf_correct_lo = c->at(0).get<double>();
        spec.conf_correct_hi = c->at(1).get<double>();
      }
      if (auto c = it->find("conf_wrong"); c != it->end()) {
        spec.conf_wrong_lo = c->at(0).get<double>();
        spec.conf_wrong_hi = c->at(1).get<double>();
      }
      spec.seed = it->value("seed", std::uint64_t{0});
      PanelConfig config = materialize_mock_panel(spec);
      if (auto p = doc.find("prompt"); p != doc.end())
        config.prompt = prompt_from_json(*p);
      return config;
    }
    PanelConfig config;
    for (const json& entry : doc.at("experts"))
      config.experts.push_back(panel_entry_from_json(entry));
    if (auto p = doc.find("prompt"); p != doc.end())
      config.prompt = prompt_from_json(*p);
    if (config.experts.empty())
      throw Error(ErrorCode::ConfigInvalid, "panel config lists no experts");
    return config;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid,
                std::string("panel config: ") + e.what());
  }
}

std::string panel_config_to_json(const PanelConfig& config) {
  json experts = json::array();
  for (const PanelEntryConfig& entry : config.experts)
    experts.push_back(panel_entry_to_json(entry));
  json doc{{"experts", std::move(experts)},
           {"prompt",
            json{{"role_preamble", config.prompt.role_preamble},
                 {"history_line_format", config.prompt.history_line_format},
                 {"query_line_format", config.prompt.query_line_format},
                 {"max_history", config.prompt.max_history}}}};
  return doc.dump();
}

ExpertPanel build_panel(const PanelConfig& config,
                        std::shared_ptr<const CandidatePools> pools,
                        std::shared_ptr<const EntityRegistry> registry) {
  std::vector<PanelExpert> experts;
  for (const PanelEntryConfig& entry : config.experts) {
    PanelExpert expert;
    expert.expert_id = entry.expert_id;
    expert.home_countries = entry.home_countries;
    if (entry.backend == "mock") {
      if (!pools)
        throw Error(ErrorCode::ConfigInvalid,
                    "mock experts need candidate pools (run prepare first)");
      expert.backend = std::make_shared<MockExpertBackend>(
          entry.expert_id, entry.profile, pools);
    } else {
      if (!registry)
        throw Error(ErrorCode::ConfigInvalid,
                    "remote experts need an entity registry");
      expert.backend = std::make_shared<RemoteExpertBackend>(
          entry.expert_id, entry.endpoint, config.prompt, registry);
    }
    experts.push_back(std::move(expert));
  }
  return ExpertPanel(std::move(experts));
}

SyntheticSpec synthetic_spec_from_json(const std::string& text) {
  json doc = parse_json(text, "generator spec");
  try {
    SyntheticSpec spec;
    spec.countries = doc.at("countries").get<std::vector<std::string>>();
    spec.entities_per_country =
        doc.value("entities_per_country", spec.entities_per_country);
    spec.relations_per_country =
        doc.value("relations_per_country", spec.relations_per_country);
    spec.contexts_per_country =
        doc.value("contexts_per_country", spec.contexts_per_country);
    spec.events = doc.at("events").get<int>();
    auto start = Date::parse(doc.at("start_date").get<std::string>());
    auto end = Date::parse(doc.at("end_date").get<std::string>());
    if (!start || !end)
      throw Error(ErrorCode::InvalidSpec, "bad generator date range");
    spec.start_date = *start;
    spec.end_date = *end;
    spec.separability = doc.value("separability", spec.separability);
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid,
                std::string("generator spec: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SourceUnreadable, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  open_out(path) << text;
}

}  // namespace eventcast
