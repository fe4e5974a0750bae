#include "urb/sim_kernel.hpp"

#include <algorithm>
#include <limits>

#include "urb/error.hpp"

namespace urb {

namespace {

constexpr std::size_t kNoOperation = std::numeric_limits<std::size_t>::max();
constexpr SimTime kNever = SimTime::max();
// A Back chain longer than this means the table never reaches an operation.
constexpr int kMaxSilentSteps = 100'000;

}  // namespace

std::optional<Duration> retry_pause(const RetryPolicy& policy, int retries_used, RetryLaterSignal signal) {
  if (!policy.enabled || retries_used >= policy.max_attempts) return std::nullopt;
  Duration pause = policy.fixed_pause ? *policy.fixed_pause
                                      : Duration{static_cast<std::int64_t>(policy.pause_factor * signal.t.count())};
  return std::max(pause, Duration{1});
}

std::vector<std::string> validate_config(const SimConfig& c) {
  std::vector<std::string> out;
  if (c.clients < 1) out.emplace_back("clients must be >= 1");
  if (c.duration <= Duration::zero()) out.emplace_back("duration_ms must be > 0");
  if (c.retry.max_attempts < 1) out.emplace_back("retry.max_attempts must be >= 1");
  if (!(c.retry.pause_factor > 0)) out.emplace_back("retry.pause_factor must be > 0");
  if (c.retry.fixed_pause && *c.retry.fixed_pause <= Duration::zero())
    out.emplace_back("retry.fixed_pause_ms must be > 0");
  if (c.abandonment <= Duration::zero()) out.emplace_back("abandonment_ms must be > 0");
  if (c.error_pause <= Duration::zero()) out.emplace_back("error_pause_ms must be > 0");
  return out;
}

ComponentStatus ComponentRuntime::status(SimTime now) const {
  if (undeployed) return ComponentStatus::undeployed;
  if (recovering_until && now < *recovering_until) return ComponentStatus::recovering;
  return ComponentStatus::online;
}

Engine::Engine(const AppModel& model, const WorkloadModel& workload, SimConfig config)
    : model_(model), workload_(workload), config_(config), probe_rng_(derive_seed(config.seed, ~0ULL)) {
  require_valid(model_);
  if (auto v = validate_workload(workload_, &model_); !v.empty()) {
    std::string msg = "invalid workload:";
    for (const auto& e : v) msg += "\n  " + e.message;
    throw ValidationError(msg);
  }
  if (auto v = validate_config(config_); !v.empty()) {
    std::string msg = "invalid simulation config:";
    for (const auto& e : v) msg += "\n  " + e;
    throw ValidationError(msg);
  }

  runtime_.resize(model_.components.size());
  for (std::size_t i = 0; i < runtime_.size(); ++i) runtime_[i].spec = &model_.components[i];
  faults_.resize(model_.components.size());
  for (const auto& op : model_.operations) {
    std::vector<std::size_t> path;
    for (const auto& hop : op.path) path.push_back(*model_.component_index(hop));
    op_paths_.push_back(std::move(path));
  }
  state_to_op_.resize(workload_.states.size(), kNoOperation);
  for (std::size_t s = 0; s < workload_.states.size(); ++s) {
    if (!workload_.is_pseudo(s)) state_to_op_[s] = *model_.operation_index(workload_.states[s]);
  }
}

std::size_t Engine::component(std::string_view id) const {
  if (auto i = model_.component_index(id)) return *i;
  throw UnknownComponentError(std::string(id));
}

void Engine::schedule(RecoveryAction action) {
  if (action.kind == RecoveryAction::Kind::microreboot) {
    if (action.components.empty()) throw ValidationError("microreboot action needs at least one component");
    for (const auto& id : action.components) component(id);
  }
  actions_.push_back(std::move(action));
}

void Engine::inject(FaultSpec fault) {
  const std::size_t comp = component(fault.target);
  if (fault.onset < SimTime::zero()) throw ValidationError("fault onset must be >= 0");
  if (fault.kind == FaultKind::degrade && !(fault.p >= 0.0 && fault.p <= 1.0))
    throw ValidationError("degrade probability must be in [0, 1]");
  faults_[comp].push_back({std::move(fault), kNever});
}

void Engine::push(SimTime time, EventKind kind, std::uint64_t subject, std::uint64_t token) {
  queue_.push(Event{time, seq_++, kind, subject, token});
}

SimResult Engine::run() {
  if (ran_) throw Error("engine already ran");
  ran_ = true;

  for (std::uint32_t c = 0; c < config_.clients; ++c) {
    Client client;
    client.state = make_client(c, workload_, derive_seed(config_.seed, 3ULL * c), next_session_id_);
    client.service_rng = Rng(derive_seed(config_.seed, 3ULL * c + 1));
    client.fault_rng = Rng(derive_seed(config_.seed, 3ULL * c + 2));
    clients_.push_back(std::move(client));
  }
  for (std::uint32_t c = 0; c < config_.clients; ++c) begin_request(c, state_to_op_[clients_[c].state.current], SimTime{0});
  for (std::size_t i = 0; i < actions_.size(); ++i) push(actions_[i].trigger, EventKind::recovery, i);

  while (!queue_.empty()) {
    const Event ev = queue_.top();
    queue_.pop();
    ++result_.events_processed;
    switch (ev.kind) {
      case EventKind::client_step:
        on_client_step(static_cast<std::uint32_t>(ev.subject), ev.time);
        break;
      case EventKind::hop_retry:
        if (!requests_[ev.subject].done && requests_[ev.subject].token == ev.token) dispatch_hop(ev.subject, ev.time);
        break;
      case EventKind::hop_done:
        if (!requests_[ev.subject].done && requests_[ev.subject].token == ev.token) on_hop_done(ev.subject, ev.time);
        break;
      case EventKind::recovery:
        apply(actions_[ev.subject], ev.time);
        break;
    }
  }
  if (!active_.empty()) throw Error("simulation ended with unfinished requests");
  result_.trace = std::move(records_);
  return std::move(result_);
}

void Engine::on_client_step(std::uint32_t id, SimTime now) {
  if (now >= config_.duration) return;
  Client& client = clients_[id];
  for (int i = 0; i < kMaxSilentSteps; ++i) {
    const std::uint64_t before = client.state.session_id;
    const ClientAction action = step_client(client.state, workload_, next_session_id_);
    if (client.state.session_id != before) release_session(client, before);
    if (action.issues_request) {
      begin_request(id, state_to_op_[action.state], now);
      return;
    }
  }
  throw Error("client " + std::to_string(id) + " never issued a request");
}

void Engine::release_session(Client& client, std::uint64_t session) {
  for (std::size_t comp : client.bound_components) runtime_[comp].session_bindings.erase(session);
  client.bound_components.clear();
}

void Engine::begin_request(std::uint32_t client, std::size_t op, SimTime now) {
  const std::uint64_t id = requests_.size();
  Request req;
  req.client = client;
  req.session = clients_[client].state.session_id;
  req.op = op;
  req.start = now;
  requests_.push_back(req);

  RequestRecord rec;
  rec.request_id = id;
  rec.client_id = client;
  rec.session_id = req.session;
  rec.operation = model_.operations[op].id;
  rec.start = now;
  rec.is_db_write = model_.operations[op].is_db_write;
  records_.push_back(std::move(rec));

  if (server_down_until_ && now < *server_down_until_) return finish(id, Outcome::connection_refused, now);
  if (config_.frontend_queue_capacity != 0 && active_.size() >= config_.frontend_queue_capacity)
    return finish(id, Outcome::connection_refused, now);
  active_.insert(id);
  if (lost_sessions_.contains(req.session)) return finish(id, Outcome::failed, now);
  dispatch_hop(id, now);
}

HopOutcome Engine::attempt(std::size_t comp, SimTime now, Rng& fault_rng) const {
  const ComponentRuntime& rt = runtime_[comp];
  switch (rt.status(now)) {
    case ComponentStatus::undeployed:
      return {HopOutcome::Kind::hard_fail, {}};
    case ComponentStatus::recovering:
      return {HopOutcome::Kind::retry_later, {*rt.recovering_until - now}};
    case ComponentStatus::online:
      break;
  }
  for (const auto& f : faults_[comp]) {
    if (now < f.spec.onset || now >= f.cleared_at) continue;
    if (f.spec.kind == FaultKind::fail_stop) return {HopOutcome::Kind::hard_fail, {}};
    if (f.spec.p > 0.0 && fault_rng.uniform01() < f.spec.p) return {HopOutcome::Kind::hard_fail, {}};
  }
  return {HopOutcome::Kind::ok, {}};
}

HopOutcome Engine::probe(std::string_view callee, SimTime now) { return attempt(component(callee), now, probe_rng_); }

bool Engine::try_stall(std::uint64_t id, SimTime until, SimTime now) {
  Request& req = requests_[id];
  if (req.hop == 0) return false;  // the front servlet has no calling container
  const auto pause = retry_pause(config_.retry, req.hop_retries, RetryLaterSignal{until - now});
  if (!pause) return false;
  ++req.hop_retries;
  ++req.retries;
  push(now + *pause, EventKind::hop_retry, id, ++req.token);
  return true;
}

void Engine::dispatch_hop(std::uint64_t id, SimTime now) {
  Request& req = requests_[id];
  const std::size_t comp = op_paths_[req.op][req.hop];
  const HopOutcome out = attempt(comp, now, clients_[req.client].fault_rng);
  if (out.kind == HopOutcome::Kind::retry_later) {
    if (!try_stall(id, now + out.signal.t, now)) finish(id, Outcome::failed, now);
    return;
  }
  if (out.kind == HopOutcome::Kind::hard_fail) return finish(id, Outcome::failed, now);

  ComponentRuntime& rt = runtime_[comp];
  const Duration base = rt.spec->service_time.sample(clients_[req.client].service_rng);
  const double factor = stabilization_factor(now);
  const Duration service = factor == 1.0 ? base : Duration{static_cast<std::int64_t>(base.count() * factor)};
  rt.inflight.insert(id);
  push(now + service, EventKind::hop_done, id, ++req.token);
}

void Engine::on_hop_done(std::uint64_t id, SimTime now) {
  Request& req = requests_[id];
  const std::size_t comp = op_paths_[req.op][req.hop];
  ComponentRuntime& rt = runtime_[comp];
  rt.inflight.erase(id);
  if (rt.spec->session_state_policy == SessionStatePolicy::in_memory_volatile) {
    Client& client = clients_[req.client];
    // Bindings belong to the client's live session only.
    if (client.state.session_id == req.session && rt.session_bindings.insert(req.session).second)
      client.bound_components.push_back(comp);
  }
  ++req.hop;
  req.hop_retries = 0;
  if (req.hop == op_paths_[req.op].size()) return finish(id, req.retries > 0 ? Outcome::ok_after_retry : Outcome::ok, now);
  dispatch_hop(id, now);
}

void Engine::finish(std::uint64_t id, Outcome outcome, SimTime now) {
  Request& req = requests_[id];
  req.done = true;
  ++req.token;
  active_.erase(id);

  RequestRecord& rec = records_[id];
  rec.end = now;
  rec.retries = req.retries;
  if (is_good(outcome) && now - req.start > config_.abandonment) outcome = Outcome::failed;
  rec.outcome = outcome;

  const Client& client = clients_[req.client];
  Duration pause = workload_.think_time[client.state.current];
  if (!is_good(outcome)) pause += config_.error_pause;
  push(now + pause, EventKind::client_step, req.client);
}

double Engine::stabilization_factor(SimTime now) const {
  double factor = 1.0;
  for (const auto& w : stabilization_) {
    if (now >= w.from && now < w.to) factor = std::max(factor, w.factor);
  }
  return factor;
}

void Engine::lose_sessions(ComponentRuntime& rt, RecoveryRecord& record) {
  for (std::uint64_t s : rt.session_bindings) {
    if (lost_sessions_.insert(s).second) record.lost_sessions.push_back(s);
  }
  rt.session_bindings.clear();
}

void Engine::clear_faults(std::size_t comp, SimTime now, SimTime until) {
  for (auto& f : faults_[comp]) {
    if (f.spec.cleared_by == ClearedBy::any_reboot_covering_target && f.spec.onset <= now)
      f.cleared_at = std::min(f.cleared_at, until);
  }
}

void Engine::apply(const RecoveryAction& action, SimTime now) {
  switch (action.kind) {
    case RecoveryAction::Kind::microreboot:
      apply_microreboot(action.components, now);
      break;
    case RecoveryAction::Kind::app_restart:
      apply_app_restart(now);
      break;
    case RecoveryAction::Kind::server_restart:
      apply_server_restart(now);
      break;
  }
  if (action.stabilization > Duration::zero()) {
    const SimTime from = result_.recoveries.back().recovered_at;
    stabilization_.push_back({from, from + action.stabilization, action.stabilization_factor});
  }
}

void Engine::apply_microreboot(const std::vector<std::string>& ids, SimTime now) {
  if (ids.empty()) throw ValidationError("microreboot needs at least one component");
  std::vector<std::size_t> comps;
  for (const auto& id : ids) comps.push_back(component(id));

  RecoveryRecord record;
  record.time = now;
  record.kind = RecoveryAction::Kind::microreboot;
  record.components = ids;
  record.recovered_at = now;

  // Undeploy the whole set first so stalled callers see every member down.
  std::vector<SimTime> until(comps.size());
  SimTime cursor = now;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    ComponentRuntime& rt = runtime_[comps[i]];
    const Duration d = rt.spec->microreboot_duration;
    until[i] = model_.redeploy == RedeployOrder::serial ? (cursor += d) : now + d;
    rt.recovering_until = std::max(rt.recovering_until.value_or(until[i]), until[i]);
    until[i] = *rt.recovering_until;
    rt.undeployed = false;
    record.recovered_at = std::max(record.recovered_at, until[i]);
  }

  for (std::size_t i = 0; i < comps.size(); ++i) {
    ComponentRuntime& rt = runtime_[comps[i]];
    const std::set<std::uint64_t> victims = std::move(rt.inflight);
    rt.inflight.clear();
    for (std::uint64_t id : victims) {
      Request& req = requests_[id];
      ++req.token;
      record.killed_requests.push_back(id);
      if (model_.operations[req.op].is_db_write)
        result_.aborted_transactions.push_back({id, model_.operations[req.op].id, now});
      if (!try_stall(id, until[i], now)) finish(id, Outcome::failed, now);
    }
    if (rt.spec->session_state_policy == SessionStatePolicy::in_memory_volatile) lose_sessions(rt, record);
    clear_faults(comps[i], now, until[i]);
  }
  result_.recoveries.push_back(std::move(record));
}

void Engine::drop_all_active(SimTime now, RecoveryRecord& record) {
  const std::set<std::uint64_t> victims = active_;
  for (std::uint64_t id : victims) {
    const Request& req = requests_[id];
    record.killed_requests.push_back(id);
    if (model_.operations[req.op].is_db_write)
      result_.aborted_transactions.push_back({id, model_.operations[req.op].id, now});
    finish(id, Outcome::connection_dropped, now);
  }
  for (std::size_t c = 0; c < runtime_.size(); ++c) {
    ComponentRuntime& rt = runtime_[c];
    rt.inflight.clear();
    lose_sessions(rt, record);
  }
}

void Engine::apply_app_restart(SimTime now) {
  RecoveryRecord record;
  record.time = now;
  record.kind = RecoveryAction::Kind::app_restart;
  record.recovered_at = now + model_.app_restart_duration;
  drop_all_active(now, record);
  for (std::size_t c = 0; c < runtime_.size(); ++c) {
    ComponentRuntime& rt = runtime_[c];
    rt.recovering_until = std::max(rt.recovering_until.value_or(record.recovered_at), record.recovered_at);
    rt.undeployed = false;
    clear_faults(c, now, record.recovered_at);
    record.components.push_back(rt.spec->id);
  }
  result_.recoveries.push_back(std::move(record));
}

void Engine::apply_server_restart(SimTime now) {
  RecoveryRecord record;
  record.time = now;
  record.kind = RecoveryAction::Kind::server_restart;
  record.recovered_at = now + model_.server_restart_duration;
  server_down_until_ = std::max(server_down_until_.value_or(record.recovered_at), record.recovered_at);
  drop_all_active(now, record);
  for (std::size_t c = 0; c < runtime_.size(); ++c) {
    ComponentRuntime& rt = runtime_[c];
    rt.recovering_until = std::max(rt.recovering_until.value_or(record.recovered_at), record.recovered_at);
    rt.undeployed = false;
    clear_faults(c, now, record.recovered_at);
    record.components.push_back(rt.spec->id);
  }
  result_.recoveries.push_back(std::move(record));
}

void Engine::undeploy(std::string_view id) {
  ComponentRuntime& rt = runtime_[component(id)];
  rt.undeployed = true;
  rt.recovering_until.reset();
}

ComponentStatus Engine::status(std::string_view id, SimTime now) const { return runtime_[component(id)].status(now); }

const ComponentRuntime& Engine::runtime(std::string_view id) const { return runtime_[component(id)]; }

Duration Engine::estimate_remaining_recovery(std::string_view id, SimTime now) const {
  const ComponentRuntime& rt = runtime_[component(id)];
  if (rt.undeployed || !rt.recovering_until || now > *rt.recovering_until) throw NotRecoveringError(std::string(id));
  return std::max(*rt.recovering_until - now, Duration::zero());
}

SimResult simulate(const AppModel& model, const WorkloadModel& workload, const SimConfig& config,
                   const std::vector<RecoveryAction>& actions, const std::vector<FaultSpec>& faults) {
  Engine engine(model, workload, config);
  for (const auto& a : actions) engine.schedule(a);
  for (const auto& f : faults) engine.inject(f);
  return engine.run();
}

}  // namespace urb
