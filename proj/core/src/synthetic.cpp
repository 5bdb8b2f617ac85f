#include <algorithm>
#include <cstdio>

#include "eventcast/dataset.hpp"
#include "eventcast/rng.hpp"

namespace eventcast {
namespace {

std::string lowercase(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

int exclusive_count(const SyntheticSpec& spec) {
  int n = static_cast<int>(spec.separability *
                               static_cast<double>(spec.entities_per_country) +
                           0.5);
  return std::clamp(n, 0, spec.entities_per_country);
}

int exclusive_relation_count(const SyntheticSpec& spec) {
  int n = static_cast<int>(spec.separability *
                               static_cast<double>(spec.relations_per_country) +
                           0.5);
  return std::clamp(n, 0, spec.relations_per_country);
}

std::vector<std::string> vocabulary(const std::string& country, int total,
                                    int exclusive, const char* kind) {
  std::vector<std::string> vocab;
  vocab.reserve(static_cast<std::size_t>(total));
  std::string prefix = lowercase(country) + "_" + kind;
  for (int k = 0; k < exclusive; ++k)
    vocab.push_back(prefix + std::to_string(k));
  for (int k = 0; k < total - exclusive; ++k)
    vocab.push_back(std::string("shared_") + kind + std::to_string(k));
  return vocab;
}

void validate(const SyntheticSpec& spec) {
  if (spec.countries.empty())
    throw Error(ErrorCode::InvalidSpec, "no countries listed");
  for (const std::string& c : spec.countries)
    if (!is_country_code(c))
      throw Error(ErrorCode::InvalidSpec, "bad country code '" + c + "'");
  if (spec.entities_per_country < 2)
    throw Error(ErrorCode::InvalidSpec, "entities_per_country must be >= 2");
  if (spec.relations_per_country < 1)
    throw Error(ErrorCode::InvalidSpec, "relations_per_country must be >= 1");
  if (spec.contexts_per_country < 1)
    throw Error(ErrorCode::InvalidSpec, "contexts_per_country must be >= 1");
  if (spec.events < 1) throw Error(ErrorCode::InvalidSpec, "events must be >= 1");
  if (!(spec.separability >= 0.0 && spec.separability <= 1.0))
    throw Error(ErrorCode::InvalidSpec, "separability must lie in [0, 1]");
  if (spec.end_date < spec.start_date)
    throw Error(ErrorCode::InvalidSpec, "end_date precedes start_date");
}

}  // namespace

std::vector<std::string> synthetic_entity_vocabulary(
    const SyntheticSpec& spec, const std::string& country) {
  return vocabulary(country, spec.entities_per_country, exclusive_count(spec),
                    "ent");
}

std::vector<std::string> synthetic_relation_vocabulary(
    const SyntheticSpec& spec, const std::string& country) {
  return vocabulary(country, spec.relations_per_country,
                    exclusive_relation_count(spec), "rel");
}

std::vector<std::pair<std::string, double>> synthetic_object_distribution(
    const SyntheticSpec& spec, const std::string& country) {
  auto vocab = synthetic_entity_vocabulary(spec, country);
  std::vector<std::pair<std::string, double>> dist;
  dist.reserve(vocab.size());
  double total = 0.0;
  for (std::size_t j = 0; j < vocab.size(); ++j)
    total += 1.0 / static_cast<double>(j + 1);
  for (std::size_t j = 0; j < vocab.size(); ++j)
    dist.emplace_back(vocab[j], 1.0 / (static_cast<double>(j + 1) * total));
  return dist;
}

EventStore generate_synthetic_corpus(const SyntheticSpec& spec,
                                     std::uint64_t seed) {
  validate(spec);

  const std::size_t n_countries = spec.countries.size();
  std::vector<std::vector<std::string>> entities(n_countries);
  std::vector<std::vector<std::string>> relations(n_countries);
  std::vector<std::vector<double>> object_cdf(n_countries);
  for (std::size_t ci = 0; ci < n_countries; ++ci) {
    entities[ci] = synthetic_entity_vocabulary(spec, spec.countries[ci]);
    relations[ci] = synthetic_relation_vocabulary(spec, spec.countries[ci]);
    double acc = 0.0;
    for (const auto& [entity, p] :
         synthetic_object_distribution(spec, spec.countries[ci])) {
      acc += p;
      object_cdf[ci].push_back(acc);
    }
    object_cdf[ci].back() = 1.0;
  }

  const std::int64_t span_days =
      static_cast<std::int64_t>(spec.end_date.serial()) -
      spec.start_date.serial() + 1;

  EventStore store;
  store.events.reserve(static_cast<std::size_t>(spec.events));
  SplitMix64 rng(mix64(seed, 0x5943u /* "SY" */));
  for (int i = 0; i < spec.events; ++i) {
    const std::size_t ci = static_cast<std::size_t>(i) % n_countries;
    const auto& vocab = entities[ci];

    EventQuad quad;
    char id_buf[16];
    std::snprintf(id_buf, sizeof(id_buf), "e%07d", i);
    quad.event_id = id_buf;
    quad.country = spec.countries[ci];
    quad.timestamp = add_days(
        spec.start_date,
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span_days))));
    quad.subject = vocab[rng.next_below(vocab.size())];
    quad.relation = relations[ci][rng.next_below(relations[ci].size())];
    double u = rng.next_unit();
    std::size_t oj = static_cast<std::size_t>(
        std::lower_bound(object_cdf[ci].begin(), object_cdf[ci].end(), u) -
        object_cdf[ci].begin());
    quad.object = vocab[std::min(oj, vocab.size() - 1)];
    quad.context_id =
        lowercase(quad.country) + "_ctx" +
        std::to_string(rng.next_below(
            static_cast<std::uint64_t>(spec.contexts_per_country)));

    store.entity_registry[quad.subject] = quad.subject;
    store.entity_registry[quad.object] = quad.object;
    store.events.push_back(std::move(quad));
  }
  return store;
}

}  // namespace eventcast
