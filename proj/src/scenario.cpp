#include "urb/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "json_io.hpp"
#include "urb/error.hpp"
#include "urb/fault_policy.hpp"

namespace urb {

namespace {

using detail::optional_or;
using detail::required;

FaultSpec parse_fault(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": fault must be an object");
  FaultSpec f;
  f.target = required<std::string>(j, "target", where);
  const double onset = required<double>(j, "onset_ms", where);
  if (onset < 0) throw ValidationError(where + ": onset_ms must be >= 0");
  f.onset = from_ms(onset);
  const auto kind = optional_or<std::string>(j, "kind", "fail-stop", where);
  const auto k = parse_fault_kind(kind);
  if (!k) throw ValidationError(where + ": unknown fault kind \"" + kind + "\"");
  f.kind = *k;
  f.p = optional_or<double>(j, "p", 1.0, where);
  if (f.kind == FaultKind::degrade && !(f.p >= 0.0 && f.p <= 1.0))
    throw ValidationError(where + ": p must be in [0, 1]");
  const auto cleared = optional_or<std::string>(j, "cleared_by", "any-reboot-covering-target", where);
  const auto c = parse_cleared_by(cleared);
  if (!c) throw ValidationError(where + ": unknown cleared_by \"" + cleared + "\"");
  f.cleared_by = *c;
  return f;
}

RecoveryPlan parse_recovery(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": recovery must be an object");
  RecoveryPlan r;
  const auto policy = required<std::string>(j, "policy", where);
  const auto p = parse_recovery_policy(policy);
  if (!p) throw ValidationError(where + ": unknown policy \"" + policy + "\"");
  r.policy = *p;
  r.failing = optional_or<std::string>(j, "failing", "", where);
  if (r.policy == RecoveryPolicy::microreboot_closure && r.failing.empty())
    throw ValidationError(where + ": microreboot-closure needs \"failing\"");
  const double trigger = required<double>(j, "trigger_ms", where);
  if (trigger < 0) throw ValidationError(where + ": trigger_ms must be >= 0");
  r.trigger = from_ms(trigger);
  const double stab = optional_or<double>(j, "stabilization_ms", 0.0, where);
  if (stab < 0) throw ValidationError(where + ": stabilization_ms must be >= 0");
  r.stabilization = from_ms(stab);
  r.stabilization_factor = optional_or<double>(j, "stabilization_factor", 1.0, where);
  if (!(r.stabilization_factor >= 1.0)) throw ValidationError(where + ": stabilization_factor must be >= 1");
  return r;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  constexpr std::string_view where = "scenario";
  if (!doc.is_object()) throw ValidationError("scenario: document must be an object");
  Scenario s;
  s.model_path = resolve(base_dir, required<std::string>(doc, "model", where));
  s.workload_path = resolve(base_dir, required<std::string>(doc, "workload", where));
  if (!std::filesystem::exists(s.model_path))
    throw ValidationError("scenario: model file not found: " + s.model_path.string());
  if (!std::filesystem::exists(s.workload_path))
    throw ValidationError("scenario: workload file not found: " + s.workload_path.string());

  SimConfig& c = s.config;
  const auto clients = optional_or<std::int64_t>(doc, "clients", c.clients, where);
  if (clients < 1) throw ValidationError("scenario: clients must be >= 1");
  c.clients = static_cast<std::uint32_t>(clients);
  c.duration = from_ms(required<double>(doc, "duration_ms", where));
  c.seed = optional_or<std::uint64_t>(doc, "seed", c.seed, where);
  c.abandonment = from_ms(optional_or<double>(doc, "abandonment_ms", to_ms(c.abandonment), where));
  c.error_pause = from_ms(optional_or<double>(doc, "error_pause_ms", to_ms(c.error_pause), where));
  const auto cap = optional_or<std::int64_t>(doc, "frontend_queue_capacity", 0, where);
  if (cap < 0) throw ValidationError("scenario: frontend_queue_capacity must be >= 0");
  c.frontend_queue_capacity = static_cast<std::size_t>(cap);
  if (auto it = doc.find("retry"); it != doc.end()) {
    const std::string rw = "scenario.retry";
    if (!it->is_object()) throw ValidationError(rw + ": must be an object");
    c.retry.enabled = optional_or<bool>(*it, "enabled", false, rw);
    c.retry.max_attempts = optional_or<int>(*it, "max_attempts", c.retry.max_attempts, rw);
    c.retry.pause_factor = optional_or<double>(*it, "pause_factor", c.retry.pause_factor, rw);
    if (it->contains("fixed_pause_ms") && !(*it)["fixed_pause_ms"].is_null())
      c.retry.fixed_pause = from_ms(required<double>(*it, "fixed_pause_ms", rw));
  }
  if (auto errors = validate_config(c); !errors.empty()) throw ValidationError("scenario: " + errors.front());

  s.bucket = from_ms(optional_or<double>(doc, "bucket_ms", 1000.0, where));
  if (s.bucket <= Duration::zero()) throw ValidationError("scenario: bucket_ms must be > 0");
  if (auto out = optional_or<std::string>(doc, "output_dir", "", where); !out.empty())
    s.output_dir = resolve(base_dir, out);
  s.label = optional_or<std::string>(doc, "label", "", where);
  if (doc.contains("mttf_s") && !doc["mttf_s"].is_null()) s.mttf_s = required<double>(doc, "mttf_s", where);
  if (doc.contains("mttr_s") && !doc["mttr_s"].is_null()) s.mttr_s = required<double>(doc, "mttr_s", where);

  auto list = [&](std::string_view key) {
    auto it = doc.find(key);
    if (it == doc.end()) return nlohmann::json::array();
    if (!it->is_array()) throw ValidationError("scenario: \"" + std::string(key) + "\" must be an array");
    return *it;
  };
  const auto events = list("events");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string w = "scenario.events[" + std::to_string(i) + "]";
    const auto& e = events[i];
    if (e.is_object() && e.size() == 1 && e.contains("fault")) {
      s.faults.push_back(parse_fault(e["fault"], w + ".fault"));
    } else if (e.is_object() && e.size() == 1 && e.contains("recovery")) {
      s.recoveries.push_back(parse_recovery(e["recovery"], w + ".recovery"));
    } else {
      throw ValidationError(w + ": expected {\"fault\": ...} or {\"recovery\": ...}");
    }
  }
  const auto faults = list("faults");
  for (std::size_t i = 0; i < faults.size(); ++i)
    s.faults.push_back(parse_fault(faults[i], "scenario.faults[" + std::to_string(i) + "]"));
  const auto recoveries = list("recoveries");
  for (std::size_t i = 0; i < recoveries.size(); ++i)
    s.recoveries.push_back(parse_recovery(recoveries[i], "scenario.recoveries[" + std::to_string(i) + "]"));

  s.model = load_app_model(s.model_path);
  s.workload = load_workload(s.workload_path, s.model);
  if (doc.contains("think_time_ms") && !doc["think_time_ms"].is_null()) {
    const double think = required<double>(doc, "think_time_ms", where);
    if (think < 0) throw ValidationError("scenario: think_time_ms must be >= 0");
    std::fill(s.workload.think_time.begin(), s.workload.think_time.end(), from_ms(think));
  }

  for (const auto& f : s.faults) {
    if (!s.model.find_component(f.target)) throw ValidationError("scenario: fault: unknown component " + f.target);
  }
  for (const auto& r : s.recoveries) {
    if (r.policy != RecoveryPolicy::microreboot_closure) continue;
    if (!s.model.find_component(r.failing))
      throw ValidationError("scenario: recovery: unknown component " + r.failing);
    for (const auto& f : s.faults) {
      if (f.target == r.failing && r.trigger < f.onset)
        throw ValidationError("scenario: recovery of " + r.failing + " triggers before its fault onset");
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const auto doc = detail::read_json_file(path);
  try {
    return scenario_from_json(doc, path.parent_path());
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<RecoveryAction> planned_actions(const Scenario& scenario) {
  std::vector<RecoveryAction> actions;
  for (const auto& plan : scenario.recoveries) {
    if (auto a = plan_recovery(scenario.model, plan)) actions.push_back(std::move(*a));
  }
  return actions;
}

RunOutput run_scenario(const Scenario& scenario) {
  RunOutput out;
  out.result = simulate(scenario.model, scenario.workload, scenario.config, planned_actions(scenario), scenario.faults);
  ReportOptions opts;
  opts.label = scenario.label;
  opts.bucket = scenario.bucket;
  opts.horizon = scenario.config.duration;
  opts.mttf_s = scenario.mttf_s;
  opts.mttr_s = scenario.mttr_s;
  out.report = build_report(out.result.trace, scenario.workload.homepage, opts);
  return out;
}

void write_artifacts(const std::filesystem::path& dir, const RunOutput& run) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  write_trace_csv(dir / "trace.csv", run.result.trace);
  write_report(dir / "report.json", run.report);
  write_buckets_csv(dir / "buckets.csv", run.report);
}

std::vector<Summary> summarize(const std::vector<MetricsReport>& reports) {
  struct Field {
    const char* name;
    double (*get)(const MetricsReport&);
  };
  static constexpr Field fields[] = {
      {"requests_total", [](const MetricsReport& r) { return static_cast<double>(r.requests_total); }},
      {"failed_requests_total", [](const MetricsReport& r) { return static_cast<double>(r.failed_requests_total); }},
      {"perceived_downtime_s", [](const MetricsReport& r) { return r.perceived_downtime_s; }},
      {"downtime_span_s", [](const MetricsReport& r) { return r.downtime_span_s; }},
      {"g_ses", [](const MetricsReport& r) { return static_cast<double>(r.g_ses); }},
      {"sessions_total", [](const MetricsReport& r) { return static_cast<double>(r.sessions_total); }},
  };
  std::vector<Summary> out;
  if (reports.empty()) return out;
  const double n = static_cast<double>(reports.size());
  for (const auto& f : fields) {
    double sum = 0;
    for (const auto& r : reports) sum += f.get(r);
    const double mean = sum / n;
    double sq = 0;
    for (const auto& r : reports) sq += (f.get(r) - mean) * (f.get(r) - mean);
    out.push_back({f.name, mean, reports.size() > 1 ? std::sqrt(sq / (n - 1)) : 0.0});
  }
  return out;
}

nlohmann::json to_json(const std::vector<Summary>& summary, const std::vector<std::uint64_t>& seeds) {
  nlohmann::json j;
  j["seeds"] = seeds;
  j["metrics"] = nlohmann::json::object();
  for (const auto& s : summary) j["metrics"][s.metric] = {{"mean", s.mean}, {"stddev", s.stddev}};
  return j;
}

}  // namespace urb
