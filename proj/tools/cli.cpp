#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "eventcast/evaluation.hpp"
#include "eventcast/io.hpp"
#include "eventcast/rng.hpp"
#include "run_config.hpp"

namespace eventcast::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownCommand:
      return 1;
    case ErrorCode::ConfigInvalid:
    case ErrorCode::UnknownFormat:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadK:
    case ErrorCode::MissingRouter:
    case ErrorCode::ModelPanelMismatch:
      return 2;
    case ErrorCode::SourceUnreadable:
    case ErrorCode::DataInvalid:
    case ErrorCode::EmptyAfterNormalization:
    case ErrorCode::HistoryNotPrior:
    case ErrorCode::EmptyLogprobs:
    case ErrorCode::PositiveLogprob:
    case ErrorCode::CandidatePoolTooSmall:
    case ErrorCode::EmptySupervision:
    case ErrorCode::EmptyPredictions:
    case ErrorCode::EmptyOutcomes:
      return 3;
    case ErrorCode::Timeout:
    case ErrorCode::ProtocolError:
    case ErrorCode::PanelFailed:
    case ErrorCode::RoutedExpertFailed:
    case ErrorCode::AllEliteExpertsFailed:
      return 4;
  }
  return 1;
}

struct Flags {
  std::string config_path;
  std::string strategy;
  std::string inner;
  int k = 0;
  std::string seeds;
  int parallelism = 0;
  std::string format;
  std::string cutoff;
  std::string query_file;
  std::string input;
  std::string out;
  bool untrained = false;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string item = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) {
      try {
        seeds.push_back(std::stoull(item));
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigInvalid, "bad seed '" + item + "'");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return seeds;
}

RunConfig load_config(const Flags& flags) {
  if (flags.config_path.empty())
    throw Error(ErrorCode::ConfigInvalid, "--config is required");
  RunConfig config = load_run_config(flags.config_path);
  if (!flags.format.empty()) config.format = parse_format(flags.format);
  if (!flags.cutoff.empty()) {
    auto cutoff = Date::parse(flags.cutoff);
    if (!cutoff)
      throw Error(ErrorCode::ConfigInvalid,
                  "--cutoff '" + flags.cutoff + "' is not a date");
    config.cutoff = *cutoff;
  }
  if (!flags.seeds.empty()) config.seeds = parse_seed_list(flags.seeds);
  if (flags.parallelism > 0) config.parallelism = flags.parallelism;
  return config;
}

std::vector<std::uint64_t> require_seeds(const RunConfig& config) {
  if (config.seeds.empty())
    throw Error(ErrorCode::ConfigInvalid,
                "seeds are required (config \"seeds\" or --seeds)");
  return config.seeds;
}

int resolve_parallelism(const RunConfig& config) {
  if (config.parallelism > 0) return config.parallelism;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

StrategyKind wisdom_kind(const std::string& name) {
  StrategyKind kind = strategy_kind_from_string(name);
  if (kind == StrategyKind::Elite || kind == StrategyKind::Routing)
    throw Error(ErrorCode::ConfigInvalid,
                "'" + name + "' is not a wisdom strategy");
  return kind;
}

StrategyConfig resolve_strategy(const RunConfig& config, const Flags& flags) {
  std::optional<StrategyConfig> strategy = config.strategy;
  if (!flags.strategy.empty()) {
    StrategyConfig s;
    s.kind = strategy_kind_from_string(flags.strategy);
    if (s.kind == StrategyKind::Elite) {
      s.k = flags.k > 0 ? flags.k
                        : (strategy && strategy->kind == StrategyKind::Elite
                               ? strategy->k
                               : 0);
      s.inner = !flags.inner.empty()
                    ? wisdom_kind(flags.inner)
                    : (strategy && strategy->kind == StrategyKind::Elite
                           ? strategy->inner
                           : StrategyKind::WeightedBestOfN);
    }
    strategy = s;
  } else if (strategy) {
    if (flags.k > 0) strategy->k = flags.k;
    if (!flags.inner.empty()) strategy->inner = wisdom_kind(flags.inner);
  }
  if (!strategy)
    throw Error(ErrorCode::ConfigInvalid,
                "no strategy given (config \"strategy\" or --strategy)");
  if (strategy->kind == StrategyKind::Elite && strategy->k < 1)
    throw Error(ErrorCode::ConfigInvalid, "elite strategy needs --k >= 1");
  if (strategy->kind != StrategyKind::Elite) {
    strategy->k = 0;
    strategy->inner = StrategyKind::WeightedBestOfN;
  }
  return *strategy;
}

EventStore load_or_generate(const RunConfig& config) {
  if (config.generator)
    return generate_synthetic_corpus(*config.generator, config.generator_seed);
  if (!config.events_file)
    throw Error(ErrorCode::ConfigInvalid,
                "config needs paths.events_file or dataset.generator");
  return ingest_file(*config.events_file, config.format);
}

const std::vector<std::string>& selected_countries(const RunConfig& config) {
  return config.selected_countries.empty() ? default_selected_countries()
                                           : config.selected_countries;
}

struct LoadedPanel {
  std::shared_ptr<const CandidatePools> pools;
  std::shared_ptr<const EntityRegistry> registry;
  std::unique_ptr<ExpertPanel> panel;
};

LoadedPanel load_panel(const RunConfig& config) {
  std::string text;
  if (fs::exists(config.panel_file))
    text = read_text_file(config.panel_file);
  else if (config.panel_json)
    text = *config.panel_json;
  else
    throw Error(ErrorCode::ConfigInvalid,
                "no panel available: add a \"panel\" block or run gen-panel");
  PanelConfig panel_config = panel_config_from_json(text);

  bool has_mock = false;
  bool has_remote = false;
  for (const PanelEntryConfig& entry : panel_config.experts) {
    has_mock |= entry.backend == "mock";
    has_remote |= entry.backend == "remote";
  }

  LoadedPanel loaded;
  if (has_mock) {
    const fs::path events_path = config.output_dir / "events.jsonl";
    if (!fs::exists(events_path))
      throw Error(ErrorCode::DataInvalid,
                  events_path.string() + " missing; run prepare first");
    auto events = read_events_jsonl(events_path);
    loaded.pools = std::make_shared<CandidatePools>(
        CandidatePools::from_events(events));
  }
  if (has_remote) {
    const fs::path registry_path = config.output_dir / "registry.json";
    if (!fs::exists(registry_path))
      throw Error(ErrorCode::DataInvalid,
                  registry_path.string() + " missing; run prepare first");
    loaded.registry = std::make_shared<EntityRegistry>(
        read_registry_json(registry_path));
  }
  loaded.panel = std::make_unique<ExpertPanel>(
      build_panel(panel_config, loaded.pools, loaded.registry));
  return loaded;
}

std::vector<ForecastQuery> load_queries(const RunConfig& config,
                                        const char* name) {
  const fs::path path = config.output_dir / name;
  if (!fs::exists(path))
    throw Error(ErrorCode::DataInvalid,
                path.string() + " missing; run prepare first");
  return read_queries_jsonl(path);
}

RouterModel load_model_or_fail(const RunConfig& config) {
  if (!fs::exists(config.model_file))
    throw Error(ErrorCode::ConfigInvalid,
                "no trained router model at " + config.model_file.string() +
                    "; run train-router first");
  return load_router(config.model_file);
}

int cmd_ingest(const Flags& flags) {
  RunConfig config = load_config(flags);
  EventStore store = load_or_generate(config);
  write_events_jsonl(config.output_dir / "events.jsonl", store.events);
  write_rejects_jsonl(config.output_dir / "rejects.jsonl", store.rejects);
  write_registry_json(config.output_dir / "registry.json",
                      store.entity_registry);
  json summary{{"ingested", store.events.size()},
               {"rejected", store.rejects.size()},
               {"registry_entries", store.entity_registry.size()}};
  write_text_file(config.output_dir / "ingest_summary.json",
                  summary.dump() + "\n");
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_prepare(const Flags& flags) {
  RunConfig config = load_config(flags);
  EventStore raw = load_or_generate(config);
  EventStore store = deduplicate(raw);
  auto sequences = form_sequences(store, config.window_days);
  const auto& selected = selected_countries(config);
  CountryPartition partition = partition_by_country(store, selected);

  std::set<std::string> allowed(selected.begin(), selected.end());
  std::vector<EventQuad> in_scope;
  for (const EventQuad& ev : store.events)
    if (allowed.contains(ev.country)) in_scope.push_back(ev);
  SplitDataset split = split_by_cutoff(in_scope, config.cutoff);
  auto train_queries = build_queries(sequences, split.train);
  auto test_queries = build_queries(sequences, split.test);

  write_events_jsonl(config.output_dir / "events.jsonl", store.events);
  write_rejects_jsonl(config.output_dir / "rejects.jsonl", store.rejects);
  write_registry_json(config.output_dir / "registry.json",
                      store.entity_registry);
  write_events_jsonl(config.output_dir / "train.jsonl", split.train);
  write_events_jsonl(config.output_dir / "test.jsonl", split.test);
  write_queries_jsonl(config.output_dir / "train_queries.jsonl", train_queries);
  write_queries_jsonl(config.output_dir / "test_queries.jsonl", test_queries);

  json by_country = json::object();
  for (const auto& [country, events] : partition.by_country)
    by_country[country] = events.size();
  json summary{{"ingested", raw.events.size()},
               {"rejected", raw.rejects.size()},
               {"after_dedup", store.events.size()},
               {"duplicates_removed", raw.events.size() - store.events.size()},
               {"sequence_groups", sequences.size()},
               {"in_scope", in_scope.size()},
               {"out_of_scope", partition.out_of_scope.size()},
               {"train", split.train.size()},
               {"test", split.test.size()},
               {"cutoff", config.cutoff.to_string()},
               {"window_days", config.window_days},
               {"by_country", std::move(by_country)}};
  write_text_file(config.output_dir / "prepare_summary.json",
                  summary.dump() + "\n");
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_gen_panel(const Flags& flags) {
  RunConfig config = load_config(flags);
  if (!config.panel_json)
    throw Error(ErrorCode::ConfigInvalid, "config lacks a \"panel\" block");
  PanelConfig panel_config = panel_config_from_json(*config.panel_json);
  write_text_file(config.panel_file, panel_config_to_json(panel_config) + "\n");
  std::cout << "wrote " << config.panel_file.string() << " ("
            << panel_config.experts.size() << " experts)\n";
  return 0;
}

int cmd_gen_supervision(const Flags& flags) {
  RunConfig config = load_config(flags);
  auto seeds = require_seeds(config);
  auto queries = load_queries(config, "train_queries.jsonl");
  LoadedPanel loaded = load_panel(config);
  SupervisionSet supervision =
      build_supervision(queries, *loaded.panel, config.router, seeds[0],
                        resolve_parallelism(config));
  write_supervision_json(config.supervision_file, supervision);
  std::cout << "wrote " << config.supervision_file.string() << " ("
            << supervision.examples.size() << " examples, "
            << supervision.skipped << " skipped)\n";
  return 0;
}

int cmd_train_router(const Flags& flags) {
  RunConfig config = load_config(flags);
  auto seeds = require_seeds(config);
  if (!fs::exists(config.supervision_file))
    throw Error(ErrorCode::DataInvalid,
                config.supervision_file.string() +
                    " missing; run gen-supervision first");
  SupervisionSet supervision = read_supervision_json(config.supervision_file);
  RouterModel model = train_router(supervision, config.router, seeds[0]);
  save_router(model, config.model_file);
  std::cout << "wrote " << config.model_file.string() << " (final loss "
            << (model.epoch_losses().empty() ? 0.0
                                             : model.epoch_losses().back())
            << ")\n";
  return 0;
}

AggregatedForecast forecast_with(const StrategyConfig& strategy,
                                 ExpertPanel& panel, const RouterModel* model,
                                 const ForecastQuery& query,
                                 std::uint64_t draw_key) {
  switch (strategy.kind) {
    case StrategyKind::Routing:
      return expert_routing_forecast(*model, panel, query, draw_key);
    case StrategyKind::Elite:
      return elite_ensemble_forecast(*model, panel, query, strategy.k,
                                     strategy.inner, draw_key);
    default: {
      auto fan = panel.query_all(query, draw_key);
      if (fan.predictions.empty())
        throw Error(ErrorCode::PanelFailed, "every expert failed");
      return aggregate(strategy.kind, std::move(fan.predictions));
    }
  }
}

int cmd_forecast(const Flags& flags) {
  RunConfig config = load_config(flags);
  auto seeds = require_seeds(config);
  StrategyConfig strategy = resolve_strategy(config, flags);
  if (flags.query_file.empty())
    throw Error(ErrorCode::ConfigInvalid, "--query-file is required");
  ForecastQuery query = query_from_json(read_text_file(flags.query_file));

  std::optional<RouterModel> model;
  if (strategy.needs_router()) model = load_model_or_fail(config);
  LoadedPanel loaded = load_panel(config);
  AggregatedForecast forecast =
      forecast_with(strategy, *loaded.panel, model ? &*model : nullptr, query,
                    mix64(seeds[0], 0));
  std::cout << forecast_to_json(forecast) << '\n';
  return 0;
}

int cmd_evaluate(const Flags& flags) {
  RunConfig config = load_config(flags);
  auto seeds = require_seeds(config);
  StrategyConfig strategy = resolve_strategy(config, flags);
  std::optional<RouterModel> model;
  if (strategy.needs_router()) model = load_model_or_fail(config);

  auto test = load_queries(config, "test_queries.jsonl");
  LoadedPanel loaded = load_panel(config);
  const int parallelism = resolve_parallelism(config);
  for (std::uint64_t seed : seeds) {
    EvaluationReport report =
        run_strategy_eval(*loaded.panel, model ? &*model : nullptr, strategy,
                          test, seed, parallelism);
    const std::string stem =
        "report_" + strategy.slug() + "_seed" + std::to_string(seed);
    write_text_file(config.output_dir / (stem + ".json"),
                    report_to_json(report) + "\n");
    write_text_file(config.output_dir / (stem + ".csv"),
                    report_to_csv(report));
    std::cout << stem << ": micro " << report.micro << " macro "
              << report.macro << '\n';
  }
  return 0;
}

int cmd_sweep_k(const Flags& flags) {
  RunConfig config = load_config(flags);
  auto seeds = require_seeds(config);
  StrategyKind inner = !flags.inner.empty()
                           ? wisdom_kind(flags.inner)
                           : (config.strategy &&
                                      config.strategy->kind == StrategyKind::Elite
                                  ? config.strategy->inner
                                  : StrategyKind::WeightedBestOfN);
  RouterModel model = load_model_or_fail(config);
  auto test = load_queries(config, "test_queries.jsonl");
  LoadedPanel loaded = load_panel(config);
  const int parallelism = resolve_parallelism(config);

  auto write_curves = [&](const RouterModel& m, const char* kind) {
    auto curves = k_sweep(*loaded.panel, m, inner, test, seeds, parallelism);
    for (const KSweepCurve& curve : curves) {
      const std::string name = std::string("sweep_") + to_string(inner) + "_" +
                               kind + "_seed" + std::to_string(*curve.seed) +
                               ".csv";
      write_text_file(config.output_dir / name, curve_to_csv(curve));
    }
    KSweepCurve mean = mean_curve(curves);
    write_text_file(config.output_dir / (std::string("sweep_") +
                                         to_string(inner) + "_" + kind +
                                         "_mean.csv"),
                    curve_to_csv(mean));
    std::cout << "wrote " << curves.size() << " " << kind
              << " curves + mean\n";
  };
  write_curves(model, "trained");
  if (flags.untrained) {
    RouterModel untrained = make_untrained_router(loaded.panel->expert_ids(),
                                                  config.router, seeds[0]);
    write_curves(untrained, "untrained");
  }
  return 0;
}

int cmd_report(const Flags& flags) {
  if (flags.input.empty())
    throw Error(ErrorCode::ConfigInvalid, "--input is required");
  EvaluationReport report = report_from_json(read_text_file(flags.input));
  std::string csv = report_to_csv(report);
  if (flags.out.empty())
    std::cout << csv;
  else
    write_text_file(flags.out, csv);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"eventcast - multi-expert event forecasting toolkit",
               "eventcast"};
  app.require_subcommand(0, 1);
  app.footer(
      "Exit codes: 0 ok, 1 usage error or unknown command, 2 config error,\n"
      "3 data error, 4 backend/network error.\n"
      "All randomness flows from config/--seeds; reruns with identical\n"
      "configuration produce byte-identical outputs.");

  Flags flags;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path,
                    "Run configuration JSON file")
        ->required();
    cmd->add_option("--parallelism", flags.parallelism,
                    "Worker thread bound (default: number of processors)");
  };

  CLI::App* ingest = app.add_subcommand(
      "ingest", "Read or generate the raw event corpus and write "
                "events/rejects/registry");
  add_common(ingest);
  ingest->add_option("--format", flags.format, "Input format: tsv or jsonl");

  CLI::App* prepare = app.add_subcommand(
      "prepare", "Full dataset pipeline: dedup, sequences, country "
                 "partition, cutoff split, query files");
  add_common(prepare);
  prepare->add_option("--format", flags.format, "Input format: tsv or jsonl");
  prepare->add_option("--cutoff", flags.cutoff,
                      "Knowledge cutoff date YYYY-MM-DD (train <= cutoff)");

  CLI::App* gen_panel = app.add_subcommand(
      "gen-panel", "Materialize the panel block into the panel file");
  add_common(gen_panel);

  CLI::App* gen_supervision = app.add_subcommand(
      "gen-supervision",
      "Query the panel on train queries and write supervision examples");
  add_common(gen_supervision);
  gen_supervision->add_option("--seeds", flags.seeds,
                              "Comma-separated seed list (first one is used)");

  CLI::App* train = app.add_subcommand(
      "train-router", "Train the routing model from the supervision file");
  add_common(train);
  train->add_option("--seeds", flags.seeds,
                    "Comma-separated seed list (first one is used)");

  CLI::App* forecast = app.add_subcommand(
      "forecast", "Forecast a single query and print the aggregated result");
  add_common(forecast);
  forecast->add_option("--query-file", flags.query_file,
                       "ForecastQuery JSON file")
      ->required();
  forecast->add_option("--strategy", flags.strategy,
                       "routing | majority_vote | vanilla_bon | weighted_bon "
                       "| elite");
  forecast->add_option("--k", flags.k, "Elite: number of experts");
  forecast->add_option("--inner", flags.inner,
                       "Elite inner strategy (wisdom strategies only)");
  forecast->add_option("--seeds", flags.seeds, "Comma-separated seed list");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Evaluate a strategy over the test queries; write "
                  "report JSON + CSV per seed");
  add_common(evaluate);
  evaluate->add_option("--strategy", flags.strategy,
                       "routing | majority_vote | vanilla_bon | weighted_bon "
                       "| elite");
  evaluate->add_option("--k", flags.k, "Elite: number of experts");
  evaluate->add_option("--inner", flags.inner,
                       "Elite inner strategy (wisdom strategies only)");
  evaluate->add_option("--seeds", flags.seeds, "Comma-separated seed list");

  CLI::App* sweep = app.add_subcommand(
      "sweep-k", "Elite accuracy for k = 1..N; one CSV per seed plus a "
                 "mean curve");
  add_common(sweep);
  sweep->add_option("--inner", flags.inner,
                    "Inner wisdom strategy (default weighted_bon)");
  sweep->add_option("--seeds", flags.seeds, "Comma-separated seed list");
  sweep->add_flag("--untrained", flags.untrained,
                  "Also sweep an untrained (seeded random) router");

  CLI::App* report = app.add_subcommand(
      "report", "Render a stored report JSON as CSV");
  report->add_option("--input", flags.input, "Report JSON file")->required();
  report->add_option("--out", flags.out, "CSV output path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "eventcast: " << e.what() << '\n';
    return 1;
  }

  try {
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 0;
    }
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "ingest") return cmd_ingest(flags);
    if (name == "prepare") return cmd_prepare(flags);
    if (name == "gen-panel") return cmd_gen_panel(flags);
    if (name == "gen-supervision") return cmd_gen_supervision(flags);
    if (name == "train-router") return cmd_train_router(flags);
    if (name == "forecast") return cmd_forecast(flags);
    if (name == "evaluate") return cmd_evaluate(flags);
    if (name == "sweep-k") return cmd_sweep_k(flags);
    if (name == "report") return cmd_report(flags);
    throw Error(ErrorCode::UnknownCommand, name);
  } catch (const Error& e) {
    std::cerr << "eventcast: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "eventcast: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace eventcast::cli
