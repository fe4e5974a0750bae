#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "oracles.hpp"
#include "urb/app_model.hpp"
#include "urb/error.hpp"

namespace {

const std::string kData = URB_DATA_DIR;

urb::AppModel tiny() {
  urb::AppModel m;
  m.components = {{"S", urb::ComponentKind::servlet, urb::ServiceTime::constant(1), urb::from_ms(1000), {}},
                  {"A", urb::ComponentKind::entity_bean, urb::ServiceTime::constant(5), urb::from_ms(1000), {}},
                  {"B", urb::ComponentKind::entity_bean, urb::ServiceTime::constant(5), urb::from_ms(1000), {}}};
  m.operations = {{"Home", {"S"}, false, true}, {"Op", {"S", "A", "B"}, false, false}};
  m.fault_map.edges = {{"A", "B"}};
  return m;
}

bool has_message(const std::vector<urb::Violation>& v, const std::string& text) {
  for (const auto& x : v)
    if (x.message.find(text) != std::string::npos) return true;
  return false;
}

TEST(AppModel, FixtureValidates) {
  const auto m = urb::load_app_model(kData + "/rubis/model.json");
  EXPECT_TRUE(urb::validate_model(m).empty());
  EXPECT_EQ(m.homepage().id, "Home");
  EXPECT_EQ(m.redeploy, urb::RedeployOrder::serial);
}

TEST(AppModel, FixtureClosures) {
  const auto m = urb::load_app_model(kData + "/rubis/model.json");
  const auto user = urb::fault_closure(m, "UserEJB");
  EXPECT_EQ(std::set<std::string>(user.begin(), user.end()), (std::set<std::string>{"UserEJB", "ItemEJB", "BidEJB"}));
  EXPECT_EQ(user.size(), 3u);
  EXPECT_EQ(urb::fault_closure(m, "QueryEJB"), std::vector<std::string>{"QueryEJB"});
}

TEST(AppModel, ClosureStartsWithSeedAndIsDuplicateFree) {
  auto m = tiny();
  m.fault_map.edges.push_back({"B", "A"});
  EXPECT_EQ(urb::fault_closure(m, "A"), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(urb::fault_closure(m, "S"), std::vector<std::string>{"S"});
}

TEST(AppModel, ClosureOfSeedSetIsUnion) {
  const auto m = tiny();
  EXPECT_EQ(urb::fault_closure(m, std::vector<std::string>{"S", "A"}), (std::vector<std::string>{"S", "A", "B"}));
}

TEST(AppModel, ClosureUnknownComponentThrows) {
  EXPECT_THROW(urb::fault_closure(tiny(), "Nope"), urb::UnknownComponentError);
}

TEST(AppModel, ClosureMatchesWarshall) {
  std::mt19937_64 rng(42);
  for (int g = 0; g < 50; ++g) {
    const std::size_t n = 1 + rng() % 15;
    const auto m = oracle::random_model(rng(), n, rng() % (n * 2 + 1));
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (const auto& e : m.fault_map.edges) adj[*m.component_index(e.source)][*m.component_index(e.target)] = true;
    const auto reach = oracle::warshall(adj);
    for (std::size_t i = 0; i < n; ++i) {
      std::set<std::string> expect;
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][j]) expect.insert(m.components[j].id);
      const auto got = urb::fault_closure(m, m.components[i].id);
      EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), expect);
    }
  }
}

TEST(AppModel, ValidationCatchesUnresolvedPathHop) {
  auto m = tiny();
  m.operations[1].path.push_back("GhostEJB");
  const auto v = urb::validate_model(m);
  EXPECT_TRUE(has_message(v, "unresolved component GhostEJB"));
  EXPECT_THROW(urb::require_valid(m), urb::ValidationError);
}

TEST(AppModel, ValidationCatchesEdgeProblems) {
  auto m = tiny();
  m.fault_map.edges.push_back({"A", "Ghost"});
  m.fault_map.edges.push_back({"B", "B"});
  const auto v = urb::validate_model(m);
  EXPECT_TRUE(has_message(v, "unresolved component Ghost"));
  EXPECT_GE(v.size(), 2u);
}

TEST(AppModel, ValidationCatchesStructuralRules) {
  auto m = tiny();
  m.components.push_back(m.components[1]);           // duplicate id
  m.components[2].microreboot_duration = urb::Duration{0};
  m.operations[1].path = {"A"};                       // first hop must be a servlet
  m.operations.push_back({"Home2", {"S"}, false, true});
  m.server_restart_duration = urb::from_ms(1);
  const auto v = urb::validate_model(m);
  EXPECT_TRUE(has_message(v, "duplicate"));
  EXPECT_TRUE(has_message(v, "servlet"));
  EXPECT_TRUE(has_message(v, "multiple homepage"));
  EXPECT_GE(v.size(), 5u);
}

TEST(AppModel, NoHomepage) {
  auto m = tiny();
  m.operations[0].is_homepage = false;
  EXPECT_TRUE(has_message(urb::validate_model(m), "no homepage"));
  EXPECT_THROW((void)m.homepage(), urb::ValidationError);
}

TEST(AppModel, RouteFor) {
  const auto m = tiny();
  EXPECT_EQ(urb::route_for(m, "Op"), (std::vector<std::string>{"S", "A", "B"}));
  EXPECT_THROW(urb::route_for(m, "Nope"), urb::UnknownOperationError);
}

TEST(AppModel, JsonRoundTrip) {
  auto m = tiny();
  m.components[1].service_time = urb::ServiceTime::uniform(2, 4);
  m.components[2].service_time = urb::ServiceTime::exponential(3);
  m.components[2].session_state_policy = urb::SessionStatePolicy::in_memory_volatile;
  m.redeploy = urb::RedeployOrder::serial;
  const auto back = urb::app_model_from_json(urb::to_json(m));
  EXPECT_EQ(urb::to_json(back), urb::to_json(m));
}

TEST(AppModel, ParseErrorCarriesLineAndColumn) {
  const auto path = std::filesystem::temp_directory_path() / "urb_bad_model.json";
  std::ofstream(path) << "{\n  \"components\": [\n    {\"id\": }\n  ]\n}\n";
  try {
    urb::load_app_model(path);
    FAIL() << "expected a parse error";
  } catch (const urb::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(AppModel, ServiceTimeSampling) {
  urb::Rng rng(7);
  EXPECT_EQ(urb::ServiceTime::constant(2.5).sample(rng), urb::Duration{2500});
  double sum = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto d = urb::ServiceTime::uniform(10, 20).sample(rng);
    ASSERT_GE(d, urb::from_ms(10));
    ASSERT_LE(d, urb::from_ms(20));
    sum += urb::to_ms(urb::ServiceTime::exponential(5).sample(rng));
  }
  EXPECT_NEAR(sum / 20000, 5.0, 0.15);
}

}  // namespace
