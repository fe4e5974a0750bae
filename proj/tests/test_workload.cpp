#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "urb/app_model.hpp"
#include "urb/error.hpp"
#include "urb/workload.hpp"

namespace {

const std::string kData = URB_DATA_DIR;

urb::WorkloadModel chain() {
  auto w = urb::make_workload({"Home", "A", "B"}, "Home");
  w.set("Home", "A", 0.5);
  w.set("Home", "B", 0.5);
  w.set("A", "B", 0.7);
  w.set("A", "Home", 0.3);
  w.set("B", "A", 0.4);
  w.set("B", "Home", 0.6);
  return w;
}

TEST(Workload, ValidTableHasNoViolations) { EXPECT_TRUE(urb::validate_workload(chain()).empty()); }

TEST(Workload, RowSumTolerance) {
  auto w = chain();
  w.set("A", "B", 0.7 + 1e-10);
  EXPECT_TRUE(urb::validate_workload(w).empty());
  w.set("A", "B", 0.7 + 1e-6);
  ASSERT_EQ(urb::validate_workload(w).size(), 1u);
  EXPECT_EQ(urb::validate_workload(w)[0].state, "A");
}

TEST(Workload, ProbabilityRangeAndEndRow) {
  auto w = chain();
  w.set("A", "B", 1.3);
  w.set("A", "Home", -0.3);
  w.set("End", "A", 0.5);
  w.set("End", "Home", 0.5);
  const auto v = urb::validate_workload(w);
  EXPECT_GE(v.size(), 3u);
}

TEST(Workload, StatesMustBeOperations) {
  const auto app = urb::load_app_model(kData + "/rubis/model.json");
  auto w = urb::make_workload({"Home", "Teleport"}, "Home");
  w.set("Home", "Teleport", 1.0);
  w.set("Teleport", "Home", 1.0);
  bool found = false;
  for (const auto& v : urb::validate_workload(w, &app)) found = found || v.state == "Teleport";
  EXPECT_TRUE(found);
}

TEST(Workload, FixtureValidates) {
  const auto app = urb::load_app_model(kData + "/rubis/model.json");
  const auto w = urb::load_workload(kData + "/rubis/workload.json", app);
  EXPECT_TRUE(urb::validate_workload(w, &app).empty());
  EXPECT_EQ(w.homepage, "Home");
  EXPECT_FALSE(w.back_issues_request);
}

TEST(Workload, InvalidRowThrowsOnStep) {
  auto w = chain();
  w.set("A", "B", 0.2);
  std::uint64_t next = 1;
  auto c = urb::make_client(0, w, 1, next);
  c.current = w.state_index("A");
  EXPECT_THROW(urb::next_state(c, w), urb::InvalidRowError);
}

TEST(Workload, UniformRowPassesChiSquare) {
  auto w = urb::make_workload({"Home", "A", "B", "C", "D"}, "Home");
  for (auto s : {"A", "B", "C", "D"}) {
    w.set("Home", s, 0.25);
    w.set(s, "Home", 1.0);
  }
  std::uint64_t next = 1;
  auto c = urb::make_client(0, w, 99, next);
  std::map<std::size_t, int> hits;
  constexpr int kDraws = 40000;
  for (int i = 0; i < kDraws; ++i) {
    c.current = w.homepage_index();
    ++hits[urb::next_state(c, w)];
  }
  double chi2 = 0;
  for (auto s : {"A", "B", "C", "D"}) {
    const double expected = kDraws / 4.0;
    const double d = hits[w.state_index(s)] - expected;
    chi2 += d * d / expected;
  }
  EXPECT_LT(chi2, 16.27);  // 3 degrees of freedom, p = 0.001
}

TEST(Workload, VisitFrequenciesMatchStationaryDistribution) {
  const auto w = chain();
  // Power iteration over the three operation states.
  const std::vector<std::string> names{"Home", "A", "B"};
  std::vector<double> pi{1.0, 0.0, 0.0};
  for (int it = 0; it < 1000; ++it) {
    std::vector<double> nxt(3, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        nxt[j] += pi[i] * w.transition[w.state_index(names[i])][w.state_index(names[j])];
    pi = nxt;
  }
  std::uint64_t next = 1;
  auto c = urb::make_client(0, w, 5, next);
  std::map<std::size_t, int> visits;
  constexpr int kSteps = 200000;
  for (int i = 0; i < kSteps; ++i) {
    const auto a = urb::step_client(c, w, next);
    ASSERT_TRUE(a.issues_request);
    ++visits[a.state];
  }
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(static_cast<double>(visits[w.state_index(names[i])]) / kSteps, pi[i], 0.01) << names[i];
}

TEST(Workload, FixtureMixIsAboutFifteenPercentWrites) {
  const auto app = urb::load_app_model(kData + "/rubis/model.json");
  const auto w = urb::load_workload(kData + "/rubis/workload.json", app);
  std::uint64_t next = 1;
  auto c = urb::make_client(0, w, 2024, next);
  int requests = 1;
  int writes = 0;
  while (requests < 10000) {
    const auto a = urb::step_client(c, w, next);
    if (!a.issues_request) continue;
    ++requests;
    if (app.find_operation(w.states[a.state])->is_db_write) ++writes;
  }
  EXPECT_NEAR(writes / 10000.0, 0.15, 0.03);
}

TEST(Workload, BackPopsWithoutRequestAndOpensSessionWhenEmpty) {
  auto w = urb::make_workload({"Home", "A"}, "Home");
  w.set("Home", "A", 1.0);
  w.set("A", "Back", 1.0);
  std::uint64_t next = 1;
  auto c = urb::make_client(0, w, 3, next);
  EXPECT_EQ(c.session_id, 1u);

  auto a = urb::step_client(c, w, next);
  EXPECT_EQ(a.kind, urb::ClientAction::Kind::request);
  EXPECT_EQ(w.states[a.state], "A");

  a = urb::step_client(c, w, next);
  EXPECT_EQ(a.kind, urb::ClientAction::Kind::back);
  EXPECT_FALSE(a.issues_request);
  EXPECT_EQ(w.states[c.current], "Home");
  EXPECT_EQ(c.session_id, 1u);

  // Back from the homepage with nothing left on the stack: new session.
  w.set("Home", "A", 0.0);
  w.set("Home", "Back", 1.0);
  a = urb::step_client(c, w, next);
  EXPECT_EQ(a.kind, urb::ClientAction::Kind::new_session);
  EXPECT_TRUE(a.issues_request);
  EXPECT_EQ(c.session_id, 2u);
}

TEST(Workload, HomepageAndEndOpenSessions) {
  auto w = urb::make_workload({"Home", "A"}, "Home");
  w.set("Home", "A", 1.0);
  w.set("A", "End", 1.0);
  std::uint64_t next = 1;
  auto c = urb::make_client(0, w, 3, next);
  urb::step_client(c, w, next);
  const auto a = urb::step_client(c, w, next);
  EXPECT_EQ(a.kind, urb::ClientAction::Kind::new_session);
  EXPECT_EQ(w.states[a.state], "Home");
  EXPECT_EQ(c.session_id, 2u);
  EXPECT_TRUE(c.nav_stack.empty());
}

TEST(Workload, JsonRoundTrip) {
  const auto app = urb::load_app_model(kData + "/rubis/model.json");
  const auto w = urb::load_workload(kData + "/rubis/workload.json", app);
  const auto back = urb::workload_from_json(urb::to_json(w), app);
  EXPECT_EQ(back.transition, w.transition);
  EXPECT_EQ(back.states, w.states);
}

TEST(Classifier, Rules) {
  const urb::ResponseClassifier c;
  EXPECT_EQ(c.classify({200, "<html>ok</html>"}), urb::Correctness::correct);
  EXPECT_EQ(c.classify({500, ""}), urb::Correctness::incorrect);
  EXPECT_EQ(c.classify({404, ""}), urb::Correctness::incorrect);
  EXPECT_EQ(c.classify({std::nullopt, ""}), urb::Correctness::incorrect);
  EXPECT_EQ(c.classify({200, "Sorry, an Exception occurred"}), urb::Correctness::incorrect);
  EXPECT_EQ(c.classify({200, "FAILED to place bid"}), urb::Correctness::incorrect);
  EXPECT_EQ(c.classify({302, "moved"}), urb::Correctness::correct);
  const urb::ResponseClassifier custom({"Oops"});
  EXPECT_EQ(custom.classify({200, "oops"}), urb::Correctness::incorrect);
  EXPECT_EQ(custom.classify({200, "error"}), urb::Correctness::correct);
}

}  // namespace
