#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urb/rng.hpp"
#include "urb/time.hpp"

namespace urb {

// Per-invocation service time, sampled from the caller's service stream.
struct ServiceTime {
  enum class Kind { constant, uniform, exponential };

  Kind kind = Kind::constant;
  double a_ms = 1.0;  // constant value, uniform min, or exponential mean
  double b_ms = 0.0;  // uniform max

  static ServiceTime constant(double ms) { return {Kind::constant, ms, 0.0}; }
  static ServiceTime uniform(double lo_ms, double hi_ms) { return {Kind::uniform, lo_ms, hi_ms}; }
  static ServiceTime exponential(double mean) { return {Kind::exponential, mean, 0.0}; }

  Duration sample(Rng& rng) const;
  double mean_ms() const;
};

enum class ComponentKind { servlet, stateless_bean, stateful_session_bean, entity_bean };
enum class SessionStatePolicy { none, external_store, in_memory_volatile };

// Whether a group microreboot redeploys its members concurrently or one at a
// time through a single deployer.
enum class RedeployOrder { parallel, serial };

struct ComponentSpec {
  std::string id;
  ComponentKind kind = ComponentKind::entity_bean;
  ServiceTime service_time;
  Duration microreboot_duration{1'000'000};
  SessionStatePolicy session_state_policy = SessionStatePolicy::none;
};

struct FaultEdge {
  std::string source;
  std::string target;
};

struct FaultPropagationMap {
  std::vector<FaultEdge> edges;
};

struct OperationSpec {
  std::string id;
  std::vector<std::string> path;  // path[0] is the front servlet
  bool is_db_write = false;
  bool is_homepage = false;
};

struct AppModel {
  std::vector<ComponentSpec> components;
  std::vector<OperationSpec> operations;
  FaultPropagationMap fault_map;
  Duration app_restart_duration{20'000'000};
  Duration server_restart_duration{30'000'000};
  RedeployOrder redeploy = RedeployOrder::parallel;

  const ComponentSpec* find_component(std::string_view id) const;
  const OperationSpec* find_operation(std::string_view id) const;
  std::optional<std::size_t> component_index(std::string_view id) const;
  std::optional<std::size_t> operation_index(std::string_view id) const;
  // Throws ValidationError when the model has no homepage operation.
  const OperationSpec& homepage() const;
};

struct Violation {
  std::string subject;  // offending id (component, operation, or edge)
  std::string message;

  bool operator==(const Violation&) const = default;
};

// Empty result means the model is valid.
std::vector<Violation> validate_model(const AppModel& model);

// Throws ValidationError listing every violation.
void require_valid(const AppModel& model);

// Components reachable from `seed` along fault-propagation edges, seed
// included. Duplicate-free, in depth-first preorder.
std::vector<std::string> fault_closure(const AppModel& model, std::string_view seed);

// Union of the closures of every seed, in first-seen order.
std::vector<std::string> fault_closure(const AppModel& model, const std::vector<std::string>& seeds);

const std::vector<std::string>& route_for(const AppModel& model, std::string_view operation);

AppModel app_model_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const AppModel& model);
AppModel load_app_model(const std::filesystem::path& path);

std::string_view to_string(ComponentKind kind);
std::string_view to_string(SessionStatePolicy policy);

}  // namespace urb
