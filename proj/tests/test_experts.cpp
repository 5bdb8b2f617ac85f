#include <doctest.h>

#include <cmath>

#include "eventcast/experts.hpp"
#include "eventcast/rng.hpp"
#include "test_support.hpp"

using namespace eventcast;
using namespace eventcast::test;

namespace {

ForecastQuery query_with_history(int events) {
  std::vector<EventQuad> history;
  for (int i = 0; i < events; ++i)
    history.push_back(quad(("h" + std::to_string(100 + i)).c_str(),
                           ("s" + std::to_string(i)).c_str(), "met",
                           ("o" + std::to_string(i)).c_str(),
                           add_days(date("2023-01-01"), i).to_string().c_str()));
  auto target = quad("t1", "subject_x", "consults", "gold_object_zz",
                     "2024-02-01");
  return make_query(target, EventHistory::from_events(std::move(history)));
}

const std::vector<std::string> kPool = {"alpha", "beta", "gamma",
                                        "gold_object_zz", "omega"};

}  // namespace

TEST_CASE("build_prompt lays out preamble, history, then the query line") {
  auto query = query_with_history(2);
  auto prompt = build_prompt(query, PromptTemplate::standard());
  auto pre = prompt.find("geopolitical analyst");
  auto h0 = prompt.find("2023-01-01: s0 met o0");
  auto h1 = prompt.find("2023-01-02: s1 met o1");
  auto q = prompt.find("2024-02-01: subject_x consults ?");
  REQUIRE(pre != std::string::npos);
  REQUIRE(h0 != std::string::npos);
  REQUIRE(h1 != std::string::npos);
  REQUIRE(q != std::string::npos);
  CHECK(pre < h0);
  CHECK(h0 < h1);
  CHECK(h1 < q);
}

TEST_CASE("build_prompt marks empty histories") {
  auto query = query_with_history(0);
  auto prompt = build_prompt(query, PromptTemplate::standard());
  CHECK(prompt.find(kNoHistoryMarker) != std::string::npos);
}

TEST_CASE("build_prompt keeps only the most recent max_history events") {
  auto query = query_with_history(35);
  auto prompt = build_prompt(query, PromptTemplate::standard());
  CHECK(prompt.find("s4 met o4") == std::string::npos);   // 31st most recent
  CHECK(prompt.find("s5 met o5") != std::string::npos);   // 30th most recent
  CHECK(prompt.find("s34 met o34") != std::string::npos); // most recent
}

TEST_CASE("the query line never carries the gold object") {
  auto query = query_with_history(3);
  auto prompt = build_prompt(query, PromptTemplate::standard());
  CHECK(prompt.find(query.gold_object) == std::string::npos);
}

TEST_CASE("templates must contain every slot") {
  PromptTemplate tmpl = PromptTemplate::standard();
  tmpl.history_line_format = "{date} {subject} {relation}";  // missing object
  CHECK_THROWS_AS(validate_template(tmpl), Error);
}

TEST_CASE("extract_confidence is the geometric-mean token probability") {
  CHECK(extract_confidence(std::vector<double>{0.0}) == 1.0);
  const double half = std::log(0.5);
  CHECK(extract_confidence(std::vector<double>{half, half}) ==
        doctest::Approx(0.5).epsilon(1e-12));
  try {
    extract_confidence(std::vector<double>{});
    FAIL("expected EmptyLogprobs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyLogprobs);
  }
  try {
    extract_confidence(std::vector<double>{-0.5, 0.25});
    FAIL("expected PositiveLogprob");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PositiveLogprob);
  }
}

TEST_CASE("extract_confidence is monotone and lands in (0, 1]") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.next_below(8);
    std::vector<double> logprobs;
    for (std::size_t i = 0; i < n; ++i) logprobs.push_back(-rng.next_in(0.0, 5.0));
    const double base = extract_confidence(logprobs);
    CHECK(base > 0.0);
    CHECK(base <= 1.0);
    auto raised = logprobs;
    const std::size_t which = rng.next_below(n);
    raised[which] = raised[which] / 2.0;  // closer to zero = higher prob
    CHECK(extract_confidence(raised) >= base);
  }
}

TEST_CASE("mock_predict honors degenerate probabilities") {
  auto query = simple_query("s", "r", "2024-02-01", "ISR", "gold_object_zz");
  MockExpertProfile always{{"ISR"}, 1.0, 1.0, 0.55, 0.95, 0.05, 0.60, 3};
  MockExpertProfile never{{"ISR"}, 0.0, 0.0, 0.55, 0.95, 0.05, 0.60, 3};
  for (std::uint64_t draw = 0; draw < 200; ++draw) {
    CHECK(mock_predict(always, query, kPool, draw, "e").object ==
          "gold_object_zz");
    CHECK(mock_predict(never, query, kPool, draw, "e").object !=
          "gold_object_zz");
  }
}

TEST_CASE("mock_predict hits the gold rate within tolerance") {
  auto query = simple_query("s", "r", "2024-02-01", "ISR", "gold_object_zz");
  MockExpertProfile profile{{"ISR"}, 0.7, 0.1, 0.55, 0.95, 0.05, 0.60, 17};
  int hits = 0;
  for (std::uint64_t draw = 0; draw < 10000; ++draw)
    hits += mock_predict(profile, query, kPool, draw, "e").object ==
                    "gold_object_zz"
                ? 1
                : 0;
  const double rate = hits / 10000.0;
  CHECK(rate > 0.68);
  CHECK(rate < 0.72);

  SUBCASE("away queries use p_away") {
    auto away = simple_query("s", "r", "2024-02-01", "EGY", "gold_object_zz");
    int away_hits = 0;
    for (std::uint64_t draw = 0; draw < 10000; ++draw)
      away_hits += mock_predict(profile, away, kPool, draw, "e").object ==
                           "gold_object_zz"
                       ? 1
                       : 0;
    const double away_rate = away_hits / 10000.0;
    CHECK(away_rate > 0.08);
    CHECK(away_rate < 0.12);
  }
}

TEST_CASE("mock_predict is bit-identical for equal (seed, draw_key, query)") {
  auto query = simple_query("s", "r", "2024-02-01", "ISR", "gold_object_zz");
  MockExpertProfile a{{"ISR"}, 0.7, 0.1, 0.55, 0.95, 0.05, 0.60, 21};
  MockExpertProfile b = a;
  for (std::uint64_t draw = 0; draw < 100; ++draw) {
    auto pa = mock_predict(a, query, kPool, draw, "e");
    auto pb = mock_predict(b, query, kPool, draw, "e");
    CHECK(pa == pb);
  }
}

TEST_CASE("mock_predict validates the candidate pool") {
  auto query = simple_query("s", "r", "2024-02-01", "ISR", "gold_object_zz");
  MockExpertProfile profile{{"ISR"}, 0.7, 0.1, 0.55, 0.95, 0.05, 0.60, 3};
  std::vector<std::string> tiny = {"gold_object_zz"};
  std::vector<std::string> missing_gold = {"alpha", "beta"};
  try {
    mock_predict(profile, query, tiny, 0, "e");
    FAIL("expected CandidatePoolTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CandidatePoolTooSmall);
  }
  CHECK_THROWS_AS(mock_predict(profile, query, missing_gold, 0, "e"), Error);
}

TEST_CASE("profiles are validated") {
  MockExpertProfile bad;
  bad.p_home = 0.2;
  bad.p_away = 0.5;  // away above home
  CHECK_THROWS_AS(validate_profile(bad), Error);
}

TEST_CASE("candidate pools fall back to the global object set") {
  std::vector<EventQuad> events = {
      quad("e1", "a", "r", "b", "2024-01-01", "ISR"),
      quad("e2", "c", "r", "d", "2024-01-02", "EGY"),
  };
  auto pools = CandidatePools::from_events(events);
  CHECK(pools.for_country("ISR").size() == 1);
  CHECK(pools.for_country("XXX").size() == 2);  // fallback: all objects
}

TEST_CASE("panel fan-out sorts by expert id and records failures") {
  std::vector<PanelExpert> experts;
  experts.push_back({"zeta", std::make_shared<ScriptedBackend>("zeta", "b", 0.5), {}});
  experts.push_back({"alpha", std::make_shared<ScriptedBackend>("alpha", "a", 0.9), {}});
  experts.push_back({"mid", std::make_shared<FailingBackend>(), {}});
  ExpertPanel panel(std::move(experts));

  auto query = simple_query("s", "r", "2024-02-01", "ISR", "a");
  auto fan = panel.query_all(query, 0);
  REQUIRE(fan.predictions.size() == 2);
  CHECK(fan.predictions[0].expert_id == "alpha");
  CHECK(fan.predictions[1].expert_id == "zeta");
  REQUIRE(fan.failures.size() == 1);
  CHECK(fan.failures[0].first == "mid");
  CHECK(fan.failures[0].second.code() == ErrorCode::Timeout);
  CHECK(panel.backend_calls() == 3);

  SUBCASE("parallel fan-out returns the same results") {
    panel.reset_call_count();
    auto parallel = panel.query_all(query, 0, 4);
    CHECK(parallel.predictions == fan.predictions);
    CHECK(panel.backend_calls() == 3);
  }
}

TEST_CASE("panels reject duplicate expert ids") {
  std::vector<PanelExpert> experts;
  experts.push_back({"a", std::make_shared<ScriptedBackend>("a", "x", 0.5), {}});
  experts.push_back({"a", std::make_shared<ScriptedBackend>("a", "y", 0.5), {}});
  CHECK_THROWS_AS(ExpertPanel(std::move(experts)), Error);
}
