#pragma once

#include <unistd.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "eventcast/dataset.hpp"
#include "eventcast/experts.hpp"
#include "eventcast/model.hpp"
#include "eventcast/rng.hpp"

namespace eventcast::test {

inline Date date(const char* iso) { return *Date::parse(iso); }

inline EventQuad quad(const char* id, const char* subject, const char* relation,
                      const char* object, const char* iso_date,
                      const char* country = "ISR",
                      const char* context = "") {
  return make_event(id, subject, relation, object, date(iso_date), country,
                    context);
}

/// Regularized upper incomplete gamma Q(a, x); used for chi-square p-values.
/// Series expansion below a+1, Lentz continued fraction above.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) return 1.0;
  if (x == 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-14) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a;
  double c = 1e308;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-14) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

/// P(chi2 >= stat) with the given degrees of freedom.
inline double chi_square_p(double stat, int df) {
  return gamma_q(static_cast<double>(df) / 2.0, stat / 2.0);
}

/// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("eventcast_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Backend returning one fixed prediction, for aggregation tests.
class ScriptedBackend final : public ExpertBackend {
 public:
  ScriptedBackend(std::string expert_id, std::string object, double confidence)
      : prediction_{std::move(expert_id), std::move(object), confidence} {}

  Result<ExpertPrediction> predict(const ForecastQuery&,
                                   std::uint64_t) override {
    return prediction_;
  }

 private:
  ExpertPrediction prediction_;
};

/// Backend that always fails with the given code.
class FailingBackend final : public ExpertBackend {
 public:
  explicit FailingBackend(ErrorCode code = ErrorCode::Timeout) : code_(code) {}

  Result<ExpertPrediction> predict(const ForecastQuery&,
                                   std::uint64_t) override {
    return Error(code_, "scripted failure");
  }

 private:
  ErrorCode code_;
};

inline ForecastQuery simple_query(const char* subject, const char* relation,
                                  const char* iso_date, const char* country,
                                  const char* gold) {
  ForecastQuery query;
  query.subject = subject;
  query.relation = relation;
  query.timestamp = date(iso_date);
  query.country = country;
  query.gold_object = gold;
  return query;
}

/// One mock specialist per country, ids "expert_<code>", per-expert seeds
/// derived from `seed`.
inline ExpertPanel make_country_panel(
    const std::vector<std::string>& countries,
    std::shared_ptr<const CandidatePools> pools, double p_home, double p_away,
    std::uint64_t seed) {
  std::vector<PanelExpert> experts;
  for (std::size_t i = 0; i < countries.size(); ++i) {
    MockExpertProfile profile;
    profile.home_countries = {countries[i]};
    profile.p_home = p_home;
    profile.p_away = p_away;
    profile.seed = mix64(seed, i);
    std::string lower = countries[i];
    for (char& c : lower) c = static_cast<char>(std::tolower(c));
    const std::string id = "expert_" + lower;
    experts.push_back(
        {id, std::make_shared<MockExpertBackend>(id, profile, pools), {countries[i]}});
  }
  return ExpertPanel(std::move(experts));
}

struct PreparedCorpus {
  EventStore store;
  std::shared_ptr<const CandidatePools> pools;
  std::vector<ForecastQuery> train_queries;
  std::vector<ForecastQuery> test_queries;
};

/// Library-level replica of the prepare pipeline over a synthetic corpus:
/// dedup, sequences (7-day window), cutoff split, query construction.
inline PreparedCorpus prepare_synthetic(const SyntheticSpec& spec,
                                        std::uint64_t seed,
                                        Date cutoff = default_cutoff()) {
  PreparedCorpus out;
  out.store = deduplicate(generate_synthetic_corpus(spec, seed));
  out.pools = std::make_shared<CandidatePools>(
      CandidatePools::from_events(out.store.events));
  auto sequences = form_sequences(out.store, 7);
  auto split = split_by_cutoff(out.store.events, cutoff);
  out.train_queries = build_queries(sequences, split.train);
  out.test_queries = build_queries(sequences, split.test);
  return out;
}

}  // namespace eventcast::test
