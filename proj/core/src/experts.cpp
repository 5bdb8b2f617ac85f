#include "eventcast/experts.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <thread>

#include "eventcast/rng.hpp"

namespace eventcast {
namespace {

void substitute(std::string& text, std::string_view slot,
                const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
}

std::string render_history_line(const PromptTemplate& tmpl,
                                const EventQuad& ev) {
  std::string line = tmpl.history_line_format;
  substitute(line, "{date}", ev.timestamp.to_string());
  substitute(line, "{subject}", ev.subject);
  substitute(line, "{relation}", ev.relation);
  substitute(line, "{object}", ev.object);
  return line;
}

void require_slots(const std::string& format,
                   std::initializer_list<std::string_view> slots,
                   const char* which) {
  for (std::string_view slot : slots)
    if (format.find(slot) == std::string::npos)
      throw Error(ErrorCode::ConfigInvalid,
                  std::string(which) + " is missing slot " + std::string(slot));
}

}  // namespace

PromptTemplate PromptTemplate::standard() {
  PromptTemplate tmpl;
  tmpl.role_preamble =
      "You are a geopolitical analyst. Review the chronological event "
      "history below and forecast the object entity that completes the "
      "final query. Answer with the entity name only.";
  tmpl.history_line_format = "{date}: {subject} {relation} {object}";
  tmpl.query_line_format = "{date}: {subject} {relation} ?";
  tmpl.max_history = 30;
  return tmpl;
}

void validate_template(const PromptTemplate& tmpl) {
  require_slots(tmpl.history_line_format,
                {"{date}", "{subject}", "{relation}", "{object}"},
                "history_line_format");
  require_slots(tmpl.query_line_format, {"{date}", "{subject}", "{relation}"},
                "query_line_format");
  if (tmpl.max_history < 0)
    throw Error(ErrorCode::ConfigInvalid, "max_history must be >= 0");
}

std::string build_prompt(const ForecastQuery& query,
                         const PromptTemplate& tmpl) {
  std::string prompt = tmpl.role_preamble;
  prompt += "\n\n";
  const auto& events = query.history.events();
  if (events.empty()) {
    prompt += kNoHistoryMarker;
    prompt += '\n';
  } else {
    std::size_t take = std::min<std::size_t>(
        events.size(), static_cast<std::size_t>(tmpl.max_history));
    for (std::size_t i = events.size() - take; i < events.size(); ++i) {
      prompt += render_history_line(tmpl, events[i]);
      prompt += '\n';
    }
  }
  std::string query_line = tmpl.query_line_format;
  substitute(query_line, "{date}", query.timestamp.to_string());
  substitute(query_line, "{subject}", query.subject);
  substitute(query_line, "{relation}", query.relation);
  prompt += '\n';
  prompt += query_line;
  prompt += '\n';
  return prompt;
}

double extract_confidence(std::span<const double> token_logprobs) {
  if (token_logprobs.empty())
    throw Error(ErrorCode::EmptyLogprobs, "no token logprobs");
  double sum = 0.0;
  for (double lp : token_logprobs) {
    if (!(lp <= 0.0))
      throw Error(ErrorCode::PositiveLogprob,
                  "logprob " + std::to_string(lp) + " is positive");
    sum += lp;
  }
  return std::exp(sum / static_cast<double>(token_logprobs.size()));
}

void validate_profile(const MockExpertProfile& profile) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(profile.p_home) || !in_unit(profile.p_away) ||
      profile.p_away > profile.p_home)
    throw Error(ErrorCode::InvalidSpec,
                "need 0 <= p_away <= p_home <= 1");
  if (!in_unit(profile.conf_correct_lo) || !in_unit(profile.conf_correct_hi) ||
      profile.conf_correct_lo > profile.conf_correct_hi)
    throw Error(ErrorCode::InvalidSpec, "bad conf_correct interval");
  if (!in_unit(profile.conf_wrong_lo) || !in_unit(profile.conf_wrong_hi) ||
      profile.conf_wrong_lo > profile.conf_wrong_hi)
    throw Error(ErrorCode::InvalidSpec, "bad conf_wrong interval");
}

ExpertPrediction mock_predict(const MockExpertProfile& profile,
                              const ForecastQuery& query,
                              std::span<const std::string> candidates,
                              std::uint64_t draw_key,
                              const std::string& expert_id) {
  if (candidates.size() < 2)
    throw Error(ErrorCode::CandidatePoolTooSmall,
                "pool has " + std::to_string(candidates.size()) + " entries");
  auto gold_it = std::lower_bound(candidates.begin(), candidates.end(),
                                  query.gold_object);
  if (gold_it == candidates.end() || *gold_it != query.gold_object)
    throw Error(ErrorCode::CandidatePoolTooSmall,
                "gold object '" + query.gold_object + "' missing from pool");

  SplitMix64 rng(mix64(profile.seed, draw_key));
  const double p = profile.home_countries.contains(query.country)
                       ? profile.p_home
                       : profile.p_away;
  if (rng.next_unit() < p) {
    return {expert_id, query.gold_object,
            rng.next_in(profile.conf_correct_lo, profile.conf_correct_hi)};
  }
  const std::size_t gold_index =
      static_cast<std::size_t>(gold_it - candidates.begin());
  std::uint64_t pick = rng.next_below(candidates.size() - 1);
  if (pick >= gold_index) ++pick;
  return {expert_id, candidates[static_cast<std::size_t>(pick)],
          rng.next_in(profile.conf_wrong_lo, profile.conf_wrong_hi)};
}

CandidatePools CandidatePools::from_events(std::span<const EventQuad> events) {
  CandidatePools pools;
  std::map<std::string, std::set<std::string>> sets;
  std::set<std::string> all;
  for (const EventQuad& ev : events) {
    sets[ev.country].insert(ev.object);
    all.insert(ev.object);
  }
  for (auto& [country, objects] : sets)
    pools.by_country_[country] =
        std::vector<std::string>(objects.begin(), objects.end());
  pools.all_ = std::vector<std::string>(all.begin(), all.end());
  return pools;
}

std::span<const std::string> CandidatePools::for_country(
    const std::string& country) const {
  auto it = by_country_.find(country);
  if (it == by_country_.end()) return all_;
  return it->second;
}

Result<ExpertPrediction> MockExpertBackend::predict(const ForecastQuery& query,
                                                    std::uint64_t draw_key) {
  try {
    return mock_predict(profile_, query, pools_->for_country(query.country),
                        draw_key, expert_id_);
  } catch (const Error& e) {
    return e;
  }
}

ExpertPanel::ExpertPanel(std::vector<PanelExpert> experts)
    : experts_(std::move(experts)) {
  if (experts_.empty())
    throw Error(ErrorCode::ConfigInvalid, "panel needs at least one expert");
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    const auto& ex = experts_[i];
    if (ex.expert_id.empty() || !ex.backend)
      throw Error(ErrorCode::ConfigInvalid, "panel entry " +
                                                std::to_string(i) +
                                                " lacks id or backend");
    if (!index_.emplace(ex.expert_id, i).second)
      throw Error(ErrorCode::ConfigInvalid,
                  "duplicate expert id '" + ex.expert_id + "'");
    ids_.push_back(ex.expert_id);
  }
}

std::size_t ExpertPanel::index_of(const std::string& expert_id) const {
  auto it = index_.find(expert_id);
  if (it == index_.end())
    throw Error(ErrorCode::InvalidArgument,
                "unknown expert '" + expert_id + "'");
  return it->second;
}

ExpertPanel::FanOut ExpertPanel::query_all(const ForecastQuery& query,
                                           std::uint64_t draw_key,
                                           int parallelism) {
  return query_subset(ids_, query, draw_key, parallelism);
}

ExpertPanel::FanOut ExpertPanel::query_subset(
    std::span<const std::string> expert_ids, const ForecastQuery& query,
    std::uint64_t draw_key, int parallelism) {
  std::vector<std::size_t> indices;
  indices.reserve(expert_ids.size());
  for (const std::string& id : expert_ids) indices.push_back(index_of(id));

  std::vector<std::optional<Result<ExpertPrediction>>> slots(indices.size());
  auto run_one = [&](std::size_t slot) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    slots[slot] = experts_[indices[slot]].backend->predict(query, draw_key);
  };

  const std::size_t n = indices.size();
  if (parallelism <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    const std::size_t threads =
        std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < n; i += threads) run_one(i);
      });
    for (auto& w : workers) w.join();
  }

  FanOut out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& slot = *slots[i];
    if (slot.ok())
      out.predictions.push_back(slot.value());
    else
      out.failures.emplace_back(experts_[indices[i]].expert_id, slot.error());
  }
  std::sort(out.predictions.begin(), out.predictions.end(),
            [](const ExpertPrediction& a, const ExpertPrediction& b) {
              return a.expert_id < b.expert_id;
            });
  std::sort(out.failures.begin(), out.failures.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace eventcast
