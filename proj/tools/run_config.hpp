#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eventcast/aggregation.hpp"
#include "eventcast/dataset.hpp"
#include "eventcast/router.hpp"

namespace eventcast::cli {

/// Parsed run configuration. Relative paths are resolved against the
/// directory of the config file. Seeds are always explicit; there is no
/// wall-clock defaulting.
struct RunConfig {
  std::optional<std::filesystem::path> events_file;
  std::filesystem::path output_dir;
  std::filesystem::path model_file;
  std::filesystem::path panel_file;
  std::filesystem::path supervision_file;

  SourceFormat format = SourceFormat::Tsv;
  Date cutoff = default_cutoff();
  int window_days = 7;
  std::vector<std::string> selected_countries;  // empty = default 35

  std::optional<SyntheticSpec> generator;
  std::uint64_t generator_seed = 0;

  RouterHyperparams router;
  std::optional<StrategyConfig> strategy;
  std::optional<std::string> panel_json;  // raw panel block

  std::vector<std::uint64_t> seeds;
  int parallelism = 0;  // 0 = number of processors
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace eventcast::cli
