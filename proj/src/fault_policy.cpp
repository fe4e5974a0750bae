#include "urb/fault_policy.hpp"

#include "urb/error.hpp"

namespace urb {

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::fail_stop: return "fail-stop";
    case FaultKind::degrade: return "degrade";
  }
  return "?";
}

std::string_view to_string(ClearedBy cleared_by) {
  switch (cleared_by) {
    case ClearedBy::any_reboot_covering_target: return "any-reboot-covering-target";
    case ClearedBy::never: return "never";
  }
  return "?";
}

std::string_view to_string(RecoveryPolicy policy) {
  switch (policy) {
    case RecoveryPolicy::microreboot_closure: return "microreboot-closure";
    case RecoveryPolicy::app_restart: return "app-restart";
    case RecoveryPolicy::server_restart: return "server-restart";
    case RecoveryPolicy::none: return "none";
  }
  return "?";
}

std::string_view to_string(RecoveryAction::Kind kind) {
  switch (kind) {
    case RecoveryAction::Kind::microreboot: return "microreboot";
    case RecoveryAction::Kind::app_restart: return "app-restart";
    case RecoveryAction::Kind::server_restart: return "server-restart";
  }
  return "?";
}

std::optional<FaultKind> parse_fault_kind(std::string_view text) {
  for (auto k : {FaultKind::fail_stop, FaultKind::degrade})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

std::optional<ClearedBy> parse_cleared_by(std::string_view text) {
  for (auto c : {ClearedBy::any_reboot_covering_target, ClearedBy::never})
    if (to_string(c) == text) return c;
  return std::nullopt;
}

std::optional<RecoveryPolicy> parse_recovery_policy(std::string_view text) {
  for (auto p : {RecoveryPolicy::microreboot_closure, RecoveryPolicy::app_restart, RecoveryPolicy::server_restart,
                 RecoveryPolicy::none})
    if (to_string(p) == text) return p;
  return std::nullopt;
}

std::optional<RecoveryAction> plan_recovery(const AppModel& model, std::string_view failing, RecoveryPolicy policy,
                                            SimTime trigger) {
  RecoveryAction action;
  action.trigger = trigger;
  switch (policy) {
    case RecoveryPolicy::none:
      return std::nullopt;
    case RecoveryPolicy::microreboot_closure:
      action.kind = RecoveryAction::Kind::microreboot;
      action.components = fault_closure(model, failing);
      return action;
    case RecoveryPolicy::app_restart:
      action.kind = RecoveryAction::Kind::app_restart;
      return action;
    case RecoveryPolicy::server_restart:
      action.kind = RecoveryAction::Kind::server_restart;
      return action;
  }
  return std::nullopt;
}

std::optional<RecoveryAction> plan_recovery(const AppModel& model, const RecoveryPlan& plan) {
  auto action = plan_recovery(model, plan.failing, plan.policy, plan.trigger);
  if (action) {
    action->stabilization = plan.stabilization;
    action->stabilization_factor = plan.stabilization_factor;
  }
  return action;
}

void inject(Engine& engine, const FaultSpec& fault) { engine.inject(fault); }

}  // namespace urb
