#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "urb/app_model.hpp"
#include "urb/recovery_types.hpp"
#include "urb/rng.hpp"
#include "urb/time.hpp"
#include "urb/trace.hpp"
#include "urb/workload.hpp"

namespace urb {

// Container-level handling of RetryLater(t).
struct RetryPolicy {
  bool enabled = false;
  int max_attempts = 3;             // retries allowed after the first RetryLater
  double pause_factor = 1.0;        // pause = pause_factor * t ...
  std::optional<Duration> fixed_pause;  // ... unless a fixed pause is configured
};

struct RetryLaterSignal {
  Duration t{0};  // estimated remaining recovery time of the callee
};

// Pause before the next attempt, or nullopt when the call must fail.
// `retries_used` counts retries already spent on this call.
std::optional<Duration> retry_pause(const RetryPolicy& policy, int retries_used, RetryLaterSignal signal);

enum class ComponentStatus { online, recovering, undeployed };

// What the callee answers to one delivery attempt.
struct HopOutcome {
  enum class Kind { ok, retry_later, hard_fail };

  Kind kind = Kind::ok;
  RetryLaterSignal signal;
};

struct SimConfig {
  std::uint32_t clients = 20;
  Duration duration{300'000'000};
  std::uint64_t seed = 1;
  RetryPolicy retry;
  Duration abandonment{8'000'000};  // slower requests are reclassified failed
  Duration error_pause{1'000'000};  // client pause after a non-ok response
  std::size_t frontend_queue_capacity = 0;  // 0: unbounded
};

std::vector<std::string> validate_config(const SimConfig& config);

struct ComponentRuntime {
  const ComponentSpec* spec = nullptr;
  std::optional<SimTime> recovering_until;  // end of the latest recovery
  bool undeployed = false;
  std::set<std::uint64_t> inflight;          // request ids executing here
  std::set<std::uint64_t> session_bindings;  // in-memory-volatile only

  ComponentStatus status(SimTime now) const;
};

struct RecoveryRecord {
  SimTime time{0};
  RecoveryAction::Kind kind = RecoveryAction::Kind::microreboot;
  std::vector<std::string> components;
  SimTime recovered_at{0};
  std::vector<std::uint64_t> killed_requests;  // in flight when the action hit
  std::vector<std::uint64_t> lost_sessions;
};

struct AbortedTransaction {
  std::uint64_t request_id = 0;
  std::string operation;
  SimTime time{0};
};

struct SimResult {
  std::vector<RequestRecord> trace;  // ordered by request_id
  std::vector<RecoveryRecord> recoveries;
  std::vector<AbortedTransaction> aborted_transactions;
  std::uint64_t events_processed = 0;
};

// Single-threaded discrete-event engine. The model and workload must outlive
// the engine; one engine executes one run.
class Engine {
 public:
  Engine(const AppModel& model, const WorkloadModel& workload, SimConfig config);

  void schedule(RecoveryAction action);
  void inject(FaultSpec fault);

  SimResult run();

  // Recovery primitives. run() calls them at trigger time; tests may call them
  // directly on an idle engine.
  void apply(const RecoveryAction& action, SimTime now);
  void apply_microreboot(const std::vector<std::string>& ids, SimTime now);
  void apply_app_restart(SimTime now);
  void apply_server_restart(SimTime now);
  void undeploy(std::string_view id);

  ComponentStatus status(std::string_view id, SimTime now) const;
  const ComponentRuntime& runtime(std::string_view id) const;
  Duration estimate_remaining_recovery(std::string_view id, SimTime now) const;

  // One delivery attempt against `callee` at `now`, faults included.
  HopOutcome probe(std::string_view callee, SimTime now);

 private:
  enum class EventKind { client_step, hop_retry, hop_done, recovery };

  struct Event {
    SimTime time;
    std::uint64_t seq;
    EventKind kind;
    std::uint64_t subject;
    std::uint64_t token;
  };

  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  struct Request {
    std::uint32_t client = 0;
    std::uint64_t session = 0;
    std::size_t op = 0;
    SimTime start{0};
    std::size_t hop = 0;
    int hop_retries = 0;
    std::uint32_t retries = 0;
    std::uint64_t token = 0;
    bool done = false;
  };

  struct FaultState {
    FaultSpec spec;
    SimTime cleared_at;
  };

  struct Client {
    ClientState state;
    Rng service_rng;
    Rng fault_rng;
    std::vector<std::size_t> bound_components;
  };

  struct Window {
    SimTime from;
    SimTime to;
    double factor;
  };

  std::size_t component(std::string_view id) const;
  void push(SimTime time, EventKind kind, std::uint64_t subject, std::uint64_t token = 0);
  void on_client_step(std::uint32_t client, SimTime now);
  void begin_request(std::uint32_t client, std::size_t op, SimTime now);
  void dispatch_hop(std::uint64_t id, SimTime now);
  void on_hop_done(std::uint64_t id, SimTime now);
  void finish(std::uint64_t id, Outcome outcome, SimTime now);
  bool try_stall(std::uint64_t id, SimTime until, SimTime now);
  HopOutcome attempt(std::size_t comp, SimTime now, Rng& fault_rng) const;
  double stabilization_factor(SimTime now) const;
  void release_session(Client& client, std::uint64_t session);
  void drop_all_active(SimTime now, RecoveryRecord& record);
  void lose_sessions(ComponentRuntime& rt, RecoveryRecord& record);
  void clear_faults(std::size_t comp, SimTime now, SimTime until);

  const AppModel& model_;
  const WorkloadModel& workload_;
  SimConfig config_;

  std::vector<ComponentRuntime> runtime_;
  std::vector<std::vector<std::size_t>> op_paths_;
  std::vector<std::size_t> state_to_op_;
  std::vector<std::vector<FaultState>> faults_;
  std::vector<RecoveryAction> actions_;

  std::vector<Client> clients_;
  std::vector<Request> requests_;
  std::vector<RequestRecord> records_;
  std::set<std::uint64_t> active_;
  std::unordered_set<std::uint64_t> lost_sessions_;
  std::vector<Window> stabilization_;
  std::optional<SimTime> server_down_until_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t seq_ = 0;
  std::uint64_t next_session_id_ = 1;
  Rng probe_rng_;
  SimResult result_;
  bool ran_ = false;
};

// Convenience: validates inputs, schedules everything, and runs.
SimResult simulate(const AppModel& model, const WorkloadModel& workload, const SimConfig& config,
                   const std::vector<RecoveryAction>& actions = {}, const std::vector<FaultSpec>& faults = {});

}  // namespace urb
