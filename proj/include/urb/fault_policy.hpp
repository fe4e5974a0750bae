#pragma once

#include <optional>
#include <string_view>

#include "urb/app_model.hpp"
#include "urb/recovery_types.hpp"
#include "urb/sim_kernel.hpp"

namespace urb {

// Maps a failing component to the action a policy prescribes. Returns nullopt
// for RecoveryPolicy::none. Throws UnknownComponentError for the closure policy
// when `failing` does not resolve.
std::optional<RecoveryAction> plan_recovery(const AppModel& model, std::string_view failing, RecoveryPolicy policy,
                                            SimTime trigger = SimTime{0});

std::optional<RecoveryAction> plan_recovery(const AppModel& model, const RecoveryPlan& plan);

// Registers the fault with the engine; throws UnknownComponentError.
void inject(Engine& engine, const FaultSpec& fault);

std::optional<FaultKind> parse_fault_kind(std::string_view text);
std::optional<ClearedBy> parse_cleared_by(std::string_view text);
std::optional<RecoveryPolicy> parse_recovery_policy(std::string_view text);

}  // namespace urb
