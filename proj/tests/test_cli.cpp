#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cli.hpp"
#include "eventcast/io.hpp"
#include "test_support.hpp"

using namespace eventcast;
using namespace eventcast::test;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<std::string> args) {
  return cli::run(std::vector<std::string>(args));
}

/// Small synthetic end-to-end configuration rooted at `dir`.
fs::path write_config(const TempDir& dir) {
  json config{
      {"paths", {{"output_dir", "out"}}},
      {"dataset",
       {{"generator",
         {{"countries", {"ISR", "EGY", "IRQ"}},
          {"entities_per_country", 8},
          {"relations_per_country", 4},
          {"contexts_per_country", 5},
          {"events", 600},
          {"start_date", "2023-06-01"},
          {"end_date", "2024-04-30"},
          {"separability", 1.0},
          {"seed", 5}}}}},
      {"panel",
       {{"mock_per_country",
         {{"countries", {"ISR", "EGY", "IRQ"}},
          {"p_home", 0.8},
          {"p_away", 0.1},
          {"seed", 7}}}}},
      {"router", {{"dim", 8192}}},
      {"strategy", {{"strategy", "weighted_bon"}}},
      {"seeds", {1}},
      {"parallelism", 1}};
  const fs::path path = dir.path() / "run.json";
  std::ofstream(path) << config.dump(2);
  return path;
}

}  // namespace

TEST_CASE("help and unknown commands use the documented exit codes") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"no-such-command"}) == 1);
  CHECK(run({"evaluate"}) == 1);  // missing required --config
}

TEST_CASE("the full pipeline runs end to end on a synthetic corpus") {
  TempDir dir("cli");
  const fs::path config = write_config(dir);
  const fs::path out = dir.path() / "out";
  const std::string cfg = config.string();

  REQUIRE(run({"prepare", "--config", cfg}) == 0);
  CHECK(fs::exists(out / "events.jsonl"));
  CHECK(fs::exists(out / "registry.json"));
  CHECK(fs::exists(out / "train.jsonl"));
  CHECK(fs::exists(out / "test.jsonl"));
  CHECK(fs::exists(out / "train_queries.jsonl"));
  CHECK(fs::exists(out / "test_queries.jsonl"));
  CHECK(fs::exists(out / "prepare_summary.json"));

  SUBCASE("prepare summary is consistent") {
    auto summary = json::parse(read_text_file(out / "prepare_summary.json"));
    CHECK(summary.at("ingested").get<int>() == 600);
    CHECK(summary.at("train").get<int>() + summary.at("test").get<int>() ==
          summary.at("in_scope").get<int>());
  }

  REQUIRE(run({"gen-panel", "--config", cfg}) == 0);
  CHECK(fs::exists(out / "panel.json"));

  SUBCASE("evaluate with a router strategy but no model is a config error") {
    CHECK(run({"evaluate", "--config", cfg, "--strategy", "elite", "--k",
               "2"}) == 2);
  }

  REQUIRE(run({"gen-supervision", "--config", cfg}) == 0);
  CHECK(fs::exists(out / "supervision.json"));

  REQUIRE(run({"train-router", "--config", cfg}) == 0);
  CHECK(fs::exists(out / "router.json"));

  REQUIRE(run({"evaluate", "--config", cfg}) == 0);
  const fs::path report_json = out / "report_weighted_bon_seed1.json";
  REQUIRE(fs::exists(report_json));
  CHECK(fs::exists(out / "report_weighted_bon_seed1.csv"));

  SUBCASE("reports parse back and carry call accounting") {
    auto report = report_from_json(read_text_file(report_json));
    CHECK(report.query_count > 0);
    CHECK(report.backend_calls == 3 * report.query_count);
    CHECK(report.micro > 0.0);
  }

  SUBCASE("evaluate is byte-deterministic across runs") {
    auto first = read_text_file(report_json);
    REQUIRE(run({"evaluate", "--config", cfg}) == 0);
    CHECK(read_text_file(report_json) == first);
  }

  SUBCASE("elite evaluation works once the router exists") {
    CHECK(run({"evaluate", "--config", cfg, "--strategy", "elite", "--k", "2",
               "--inner", "weighted_bon"}) == 0);
    CHECK(fs::exists(out / "report_elite_k2_weighted_bon_seed1.json"));
  }

  SUBCASE("sweep-k writes per-seed and mean curves") {
    REQUIRE(run({"sweep-k", "--config", cfg, "--seeds", "1,2",
                 "--untrained"}) == 0);
    CHECK(fs::exists(out / "sweep_weighted_bon_trained_seed1.csv"));
    CHECK(fs::exists(out / "sweep_weighted_bon_trained_seed2.csv"));
    CHECK(fs::exists(out / "sweep_weighted_bon_trained_mean.csv"));
    CHECK(fs::exists(out / "sweep_weighted_bon_untrained_seed1.csv"));
    CHECK(fs::exists(out / "sweep_weighted_bon_untrained_mean.csv"));
  }

  SUBCASE("forecast prints an aggregated forecast for one query") {
    auto queries = read_queries_jsonl(out / "test_queries.jsonl");
    REQUIRE_FALSE(queries.empty());
    const fs::path query_path = dir.path() / "query.json";
    std::ofstream(query_path) << query_to_json(queries.front()) << "\n";
    CHECK(run({"forecast", "--config", cfg, "--query-file",
               query_path.string()}) == 0);
  }

  SUBCASE("report renders a stored JSON report as CSV") {
    const fs::path csv_out = dir.path() / "rendered.csv";
    CHECK(run({"report", "--input", report_json.string(), "--out",
               csv_out.string()}) == 0);
    auto text = read_text_file(csv_out);
    CHECK(text.find("country,correct,total,accuracy") == 0);
    CHECK(text.find("MACRO") != std::string::npos);
  }
}

TEST_CASE("ingest writes the store artifacts for TSV input") {
  TempDir dir("ingest");
  const fs::path events = dir.path() / "events.tsv";
  std::ofstream(events)
      << "event_id\tdate\tsubject_id\tsubject_name\trelation\tobject_id\t"
         "object_name\tcountry\tcontext_id\n"
      << "e1\t2024-01-05\tISR_GOV\tIsrael Gov\tCONSULT\tEGY_GOV\tEgypt "
         "Gov\tISR\tc1\n"
      << "e2\t2024-13-01\ta\tA\tr\tb\tB\tISR\t\n";
  json config{{"paths",
               {{"output_dir", "out"}, {"events_file", "events.tsv"}}},
              {"dataset", {{"format", "tsv"}}},
              {"seeds", {1}}};
  const fs::path path = dir.path() / "run.json";
  std::ofstream(path) << config.dump(2);

  REQUIRE(run({"ingest", "--config", path.string()}) == 0);
  auto stored = read_events_jsonl(dir.path() / "out" / "events.jsonl");
  REQUIRE(stored.size() == 1);
  CHECK(stored[0].subject == "isr_gov");
  auto summary =
      json::parse(read_text_file(dir.path() / "out" / "ingest_summary.json"));
  CHECK(summary.at("rejected").get<int>() == 1);
}

TEST_CASE("missing inputs map to the data-error exit code") {
  TempDir dir("missing");
  json config{{"paths", {{"output_dir", "out"}, {"events_file", "none.tsv"}}},
              {"seeds", {1}}};
  const fs::path path = dir.path() / "run.json";
  std::ofstream(path) << config.dump(2);
  CHECK(run({"prepare", "--config", path.string()}) == 3);
}

TEST_CASE("config validation failures exit with the config code") {
  TempDir dir("badcfg");
  const fs::path path = dir.path() / "run.json";
  std::ofstream(path) << "{\"paths\": {}}";
  CHECK(run({"prepare", "--config", path.string()}) == 2);
}
