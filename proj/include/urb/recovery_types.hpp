#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "urb/time.hpp"

namespace urb {

enum class FaultKind { fail_stop, degrade };
enum class ClearedBy { any_reboot_covering_target, never };

// A fault in one component. fail_stop: every invocation fails; degrade: each
// invocation fails with probability p.
struct FaultSpec {
  std::string target;
  SimTime onset{0};
  FaultKind kind = FaultKind::fail_stop;
  double p = 1.0;
  ClearedBy cleared_by = ClearedBy::any_reboot_covering_target;
};

// What the engine executes at trigger time.
struct RecoveryAction {
  enum class Kind { microreboot, app_restart, server_restart };

  Kind kind = Kind::microreboot;
  std::vector<std::string> components;  // microreboot set, redeploy order
  SimTime trigger{0};
  // Optional post-recovery window during which every hop's service time is
  // multiplied by stabilization_factor.
  Duration stabilization{0};
  double stabilization_factor = 1.0;
};

enum class RecoveryPolicy { microreboot_closure, app_restart, server_restart, none };

// A recovery the experiment fires directly at `trigger` (detection bypassed).
struct RecoveryPlan {
  RecoveryPolicy policy = RecoveryPolicy::microreboot_closure;
  std::string failing;  // component id; unused by whole-restart policies
  SimTime trigger{0};
  Duration stabilization{0};
  double stabilization_factor = 1.0;
};

std::string_view to_string(FaultKind kind);
std::string_view to_string(ClearedBy cleared_by);
std::string_view to_string(RecoveryPolicy policy);
std::string_view to_string(RecoveryAction::Kind kind);

}  // namespace urb
