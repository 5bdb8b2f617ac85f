#include <doctest.h>

#include <map>
#include <set>

#include "eventcast/dataset.hpp"
#include "eventcast/io.hpp"
#include "test_support.hpp"

using namespace eventcast;
using namespace eventcast::test;

namespace {

SyntheticSpec eight_country_spec() {
  SyntheticSpec spec;
  spec.countries = {"ISR", "EGY", "IRQ", "YEM", "SYR", "LBN", "QAT", "PSE"};
  spec.entities_per_country = 12;
  spec.relations_per_country = 6;
  spec.contexts_per_country = 8;
  spec.events = 8000;
  spec.start_date = date("2023-01-01");
  spec.end_date = date("2024-06-30");
  spec.separability = 1.0;
  return spec;
}

std::string serialize(const EventStore& store) {
  std::string out;
  for (const EventQuad& ev : store.events) out += event_to_json(ev) + "\n";
  for (const auto& [alias, id] : store.entity_registry)
    out += alias + "=" + id + "\n";
  return out;
}

}  // namespace

TEST_CASE("the generator is deterministic given the seed") {
  auto spec = eight_country_spec();
  spec.events = 500;
  CHECK(serialize(generate_synthetic_corpus(spec, 42)) ==
        serialize(generate_synthetic_corpus(spec, 42)));
  CHECK(serialize(generate_synthetic_corpus(spec, 42)) !=
        serialize(generate_synthetic_corpus(spec, 43)));
}

TEST_CASE("separability 1.0 makes vocabularies pairwise disjoint") {
  auto spec = eight_country_spec();
  for (std::size_t i = 0; i < spec.countries.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.countries.size(); ++j) {
      auto a = synthetic_relation_vocabulary(spec, spec.countries[i]);
      auto b = synthetic_relation_vocabulary(spec, spec.countries[j]);
      std::set<std::string> sa(a.begin(), a.end());
      for (const std::string& rel : b) CHECK_FALSE(sa.contains(rel));
      auto ea = synthetic_entity_vocabulary(spec, spec.countries[i]);
      auto eb = synthetic_entity_vocabulary(spec, spec.countries[j]);
      std::set<std::string> se(ea.begin(), ea.end());
      for (const std::string& ent : eb) CHECK_FALSE(se.contains(ent));
    }
  }
}

TEST_CASE("separability 0.6 shares part of the vocabulary") {
  auto spec = eight_country_spec();
  spec.separability = 0.6;
  auto a = synthetic_entity_vocabulary(spec, "ISR");
  auto b = synthetic_entity_vocabulary(spec, "EGY");
  std::set<std::string> sa(a.begin(), a.end());
  std::size_t shared = 0;
  for (const std::string& ent : b) shared += sa.contains(ent) ? 1 : 0;
  CHECK(shared > 0);
  CHECK(shared < b.size());
}

TEST_CASE("per-country object frequencies match the spec distribution") {
  // 8 countries x 1000 events each; chi-square p > 0.01 per country.
  auto spec = eight_country_spec();
  auto store = generate_synthetic_corpus(spec, 42);

  std::map<std::string, std::map<std::string, int>> counts;
  std::map<std::string, int> totals;
  for (const EventQuad& ev : store.events) {
    counts[ev.country][ev.object] += 1;
    totals[ev.country] += 1;
  }
  for (const std::string& country : spec.countries) {
    CHECK(totals[country] == 1000);
    double stat = 0.0;
    int df = -1;
    for (const auto& [object, p] : synthetic_object_distribution(spec, country)) {
      const double expected = p * totals[country];
      const double observed = counts[country][object];
      stat += (observed - expected) * (observed - expected) / expected;
      ++df;
    }
    const double p_value = chi_square_p(stat, df);
    INFO("country ", country, " chi2 ", stat, " p ", p_value);
    CHECK(p_value > 0.01);
  }
}

TEST_CASE("gold objects stay inside the country vocabulary") {
  auto spec = eight_country_spec();
  spec.separability = 0.6;
  spec.events = 2000;
  auto store = generate_synthetic_corpus(spec, 7);
  for (const EventQuad& ev : store.events) {
    auto vocab = synthetic_entity_vocabulary(spec, ev.country);
    CHECK(std::find(vocab.begin(), vocab.end(), ev.object) != vocab.end());
  }
}

TEST_CASE("invalid generator specs are rejected") {
  auto spec = eight_country_spec();
  spec.countries.clear();
  CHECK_THROWS_AS(generate_synthetic_corpus(spec, 1), Error);

  spec = eight_country_spec();
  spec.events = 0;
  CHECK_THROWS_AS(generate_synthetic_corpus(spec, 1), Error);

  spec = eight_country_spec();
  spec.separability = 1.5;
  CHECK_THROWS_AS(generate_synthetic_corpus(spec, 1), Error);

  spec = eight_country_spec();
  spec.entities_per_country = 1;
  try {
    generate_synthetic_corpus(spec, 1);
    FAIL("expected InvalidSpec");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidSpec);
  }
}
