#include "urb/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json_io.hpp"
#include "urb/app_model.hpp"
#include "urb/error.hpp"

namespace urb {

namespace {

constexpr double kRowTolerance = 1e-9;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::optional<std::size_t> WorkloadModel::find_state(std::string_view name) const {
  auto it = std::find(states.begin(), states.end(), name);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

std::size_t WorkloadModel::state_index(std::string_view name) const {
  if (auto i = find_state(name)) return *i;
  throw UnknownOperationError(std::string(name));
}

bool WorkloadModel::is_pseudo(std::size_t state) const {
  return states[state] == kBackState || states[state] == kEndState;
}

void WorkloadModel::set(std::string_view from, std::string_view to, double p) {
  transition[state_index(from)][state_index(to)] = p;
}

WorkloadModel make_workload(const std::vector<std::string>& operations, std::string homepage) {
  WorkloadModel m;
  m.states = operations;
  m.states.emplace_back(kBackState);
  m.states.emplace_back(kEndState);
  const std::size_t n = m.states.size();
  m.transition.assign(n, std::vector<double>(n, 0.0));
  m.think_time.assign(n, Duration::zero());
  m.homepage = std::move(homepage);
  if (auto home = m.find_state(m.homepage)) m.transition[n - 1][*home] = 1.0;
  return m;
}

std::vector<WorkloadViolation> validate_workload(const WorkloadModel& model, const AppModel* app) {
  std::vector<WorkloadViolation> out;
  const std::size_t n = model.states.size();
  const auto home = model.find_state(model.homepage);
  if (!home) out.push_back({model.homepage, "homepage " + model.homepage + " is not a state"});
  if (!model.find_state(kBackState)) out.push_back({"Back", "missing Back state"});
  if (!model.find_state(kEndState)) out.push_back({"End", "missing End state"});
  if (model.transition.size() != n) {
    out.push_back({"", "transition table has wrong row count"});
    return out;
  }
  for (std::size_t a = 0; a < n; ++a) {
    const auto& row = model.transition[a];
    const auto& name = model.states[a];
    if (row.size() != n) {
      out.push_back({name, "row " + name + " has wrong length"});
      continue;
    }
    double sum = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (!(row[b] >= 0.0 && row[b] <= 1.0))
        out.push_back({name, "T(" + name + ", " + model.states[b] + ") outside [0, 1]"});
      sum += row[b];
    }
    if (name == kBackState) continue;  // Back returns to the popped state's row
    if (std::abs(sum - 1.0) > kRowTolerance) out.push_back({name, "row " + name + " does not sum to 1"});
    if (name == kEndState && home) {
      for (std::size_t b = 0; b < n; ++b) {
        if (b != *home && row[b] != 0.0) out.push_back({name, "End may only transition to the homepage"});
      }
    }
  }
  if (app != nullptr) {
    for (const auto& s : model.states) {
      if (s == kBackState || s == kEndState) continue;
      if (app->find_operation(s) == nullptr) out.push_back({s, "state " + s + " is not an operation of the model"});
    }
    if (app->homepage().id != model.homepage) out.push_back({model.homepage, "homepage differs from the model's"});
  }
  for (const auto& t : model.think_time) {
    if (t < Duration::zero()) out.push_back({"", "negative think time"});
  }
  return out;
}

std::size_t next_state(ClientState& client, const WorkloadModel& model) {
  const auto& row = model.transition.at(client.current);
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidRowError("row " + model.states[client.current] + " has a bad probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowTolerance) throw InvalidRowError("row " + model.states[client.current] + " does not sum to 1");

  const double u = client.rng.uniform01();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t b = 0; b < row.size(); ++b) {
    if (row[b] <= 0.0) continue;
    acc += row[b];
    last_positive = b;
    if (u < acc) return b;
  }
  return last_positive;  // rounding slack at the top of the row
}

ClientAction step_client(ClientState& client, const WorkloadModel& model, std::uint64_t& next_session_id) {
  const std::size_t home = model.homepage_index();
  auto open_session = [&] {
    client.session_id = next_session_id++;
    client.nav_stack.clear();
    client.current = home;
    return ClientAction{ClientAction::Kind::new_session, home, true};
  };

  const std::size_t next = next_state(client, model);
  const auto& name = model.states[next];
  if (name == kBackState) {
    if (client.nav_stack.empty()) return open_session();
    client.current = client.nav_stack.back();
    client.nav_stack.pop_back();
    if (model.back_issues_request && client.current == home) return open_session();
    return ClientAction{ClientAction::Kind::back, client.current, model.back_issues_request};
  }
  if (name == kEndState || next == home) return open_session();

  client.nav_stack.push_back(client.current);
  client.current = next;
  return ClientAction{ClientAction::Kind::request, next, true};
}

ClientState make_client(std::uint32_t client_id, const WorkloadModel& model, std::uint64_t seed,
                        std::uint64_t& next_session_id) {
  ClientState c;
  c.client_id = client_id;
  c.current = model.homepage_index();
  c.session_id = next_session_id++;
  c.rng = Rng(seed);
  return c;
}

WorkloadModel workload_from_json(const nlohmann::json& doc, const AppModel& app) {
  if (!doc.is_object()) throw ValidationError("workload: document must be an object");
  std::vector<std::string> ops;
  if (doc.contains("states")) {
    for (const auto& s : doc["states"]) {
      const auto name = s.get<std::string>();
      if (name != kBackState && name != kEndState) ops.push_back(name);
    }
  } else {
    for (const auto& op : app.operations) ops.push_back(op.id);
  }
  WorkloadModel m = make_workload(ops, app.homepage().id);
  const auto& rows = detail::required<nlohmann::json>(doc, "transitions", "workload");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& t = rows[i];
    const std::string where = "transitions[" + std::to_string(i) + "]";
    if (!t.is_array() || t.size() != 3) throw ValidationError(where + ": expected [from, to, p]");
    const auto from = t[0].get<std::string>();
    const auto to = t[1].get<std::string>();
    if (!m.find_state(from)) throw ValidationError(where + ": unknown state " + from);
    if (!m.find_state(to)) throw ValidationError(where + ": unknown state " + to);
    m.set(from, to, t[2].get<double>());
  }
  if (doc.contains("think_time_ms")) {
    const auto& tt = doc["think_time_ms"];
    if (tt.is_number()) {
      std::fill(m.think_time.begin(), m.think_time.end(), from_ms(tt.get<double>()));
    } else if (tt.is_object()) {
      for (const auto& [state, ms] : tt.items()) {
        if (!m.find_state(state)) throw ValidationError("think_time_ms: unknown state " + state);
        m.think_time[m.state_index(state)] = from_ms(ms.get<double>());
      }
    } else {
      throw ValidationError("think_time_ms must be a number or an object");
    }
  }
  m.back_issues_request = detail::optional_or<bool>(doc, "back_issues_request", false, "workload");
  return m;
}

nlohmann::json to_json(const WorkloadModel& model) {
  nlohmann::json transitions = nlohmann::json::array();
  nlohmann::json think = nlohmann::json::object();
  for (std::size_t a = 0; a < model.states.size(); ++a) {
    for (std::size_t b = 0; b < model.states.size(); ++b) {
      if (model.transition[a][b] != 0.0) transitions.push_back({model.states[a], model.states[b], model.transition[a][b]});
    }
    if (model.think_time[a] != Duration::zero()) think[model.states[a]] = to_ms(model.think_time[a]);
  }
  return {{"states", model.states},
          {"transitions", transitions},
          {"think_time_ms", think},
          {"back_issues_request", model.back_issues_request}};
}

WorkloadModel load_workload(const std::filesystem::path& path, const AppModel& app) {
  try {
    return workload_from_json(detail::read_json_file(path), app);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ResponseClassifier::ResponseClassifier() : ResponseClassifier({"error", "failed", "exception"}) {}

ResponseClassifier::ResponseClassifier(std::vector<std::string> keywords) {
  for (auto& k : keywords) keywords_.push_back(lower(k));
}

Correctness ResponseClassifier::classify(const HttpResponse& response) const {
  if (!response.status) return Correctness::incorrect;
  if (*response.status >= 400 && *response.status <= 599) return Correctness::incorrect;
  const std::string body = lower(response.body);
  for (const auto& k : keywords_) {
    if (!k.empty() && body.find(k) != std::string::npos) return Correctness::incorrect;
  }
  return Correctness::correct;
}

}  // namespace urb
