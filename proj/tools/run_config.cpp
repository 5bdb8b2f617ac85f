#include "run_config.hpp"

#include <json.hpp>

#include "eventcast/io.hpp"

namespace eventcast::cli {
namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base,
                              std::filesystem::path p) {
  if (p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  json doc = json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::ConfigInvalid,
                path.string() + " is not a JSON object");
  const std::filesystem::path base = path.has_parent_path()
                                         ? path.parent_path()
                                         : std::filesystem::path(".");
  try {
    RunConfig config;
    const json& paths = doc.at("paths");
    config.output_dir =
        resolve(base, paths.at("output_dir").get<std::string>());
    if (auto it = paths.find("events_file"); it != paths.end())
      config.events_file = resolve(base, it->get<std::string>());
    config.model_file =
        resolve(base, paths.value("model_file",
                                  (config.output_dir / "router.json").string()));
    config.panel_file =
        resolve(base, paths.value("panel_file",
                                  (config.output_dir / "panel.json").string()));
    config.supervision_file = resolve(
        base, paths.value("supervision_file",
                          (config.output_dir / "supervision.json").string()));

    if (auto ds = doc.find("dataset"); ds != doc.end()) {
      if (auto it = ds->find("format"); it != ds->end())
        config.format = parse_format(it->get<std::string>());
      if (auto it = ds->find("cutoff"); it != ds->end()) {
        auto cutoff = Date::parse(it->get<std::string>());
        if (!cutoff)
          throw Error(ErrorCode::ConfigInvalid, "cutoff is not a date");
        config.cutoff = *cutoff;
      }
      config.window_days = ds->value("window_days", config.window_days);
      if (auto it = ds->find("selected_countries"); it != ds->end())
        config.selected_countries = it->get<std::vector<std::string>>();
      if (auto it = ds->find("generator"); it != ds->end()) {
        config.generator = synthetic_spec_from_json(it->dump());
        if (!it->contains("seed"))
          throw Error(ErrorCode::ConfigInvalid,
                      "generator block needs an explicit seed");
        config.generator_seed = it->at("seed").get<std::uint64_t>();
      }
    }

    if (auto r = doc.find("router"); r != doc.end()) {
      config.router.learning_rate =
          r->value("learning_rate", config.router.learning_rate);
      config.router.epochs = r->value("epochs", config.router.epochs);
      config.router.batch_size =
          r->value("batch_size", config.router.batch_size);
      config.router.l2 = r->value("l2", config.router.l2);
      config.router.horizon = r->value("horizon", config.router.horizon);
      config.router.init_sigma =
          r->value("init_sigma", config.router.init_sigma);
      config.router.dim = r->value("dim", config.router.dim);
    }

    if (auto s = doc.find("strategy"); s != doc.end())
      config.strategy = strategy_from_json(s->dump());
    if (auto p = doc.find("panel"); p != doc.end()) config.panel_json = p->dump();
    if (auto s = doc.find("seeds"); s != doc.end())
      config.seeds = s->get<std::vector<std::uint64_t>>();
    config.parallelism = doc.value("parallelism", 0);
    return config;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid,
                path.string() + ": " + e.what());
  }
}

}  // namespace eventcast::cli
