#include "urb/app_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "urb/error.hpp"

namespace urb {

namespace detail {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

}  // namespace detail

Duration ServiceTime::sample(Rng& rng) const {
  double ms = a_ms;
  switch (kind) {
    case Kind::constant:
      break;
    case Kind::uniform:
      ms = a_ms + (b_ms - a_ms) * rng.uniform01();
      break;
    case Kind::exponential:
      ms = -a_ms * std::log1p(-rng.uniform01());
      break;
  }
  return from_ms(std::max(ms, 0.0));
}

double ServiceTime::mean_ms() const {
  return kind == Kind::uniform ? 0.5 * (a_ms + b_ms) : a_ms;
}

const ComponentSpec* AppModel::find_component(std::string_view id) const {
  auto it = std::find_if(components.begin(), components.end(), [&](const auto& c) { return c.id == id; });
  return it == components.end() ? nullptr : &*it;
}

const OperationSpec* AppModel::find_operation(std::string_view id) const {
  auto it = std::find_if(operations.begin(), operations.end(), [&](const auto& o) { return o.id == id; });
  return it == operations.end() ? nullptr : &*it;
}

std::optional<std::size_t> AppModel::component_index(std::string_view id) const {
  const auto* c = find_component(id);
  if (c == nullptr) return std::nullopt;
  return static_cast<std::size_t>(c - components.data());
}

std::optional<std::size_t> AppModel::operation_index(std::string_view id) const {
  const auto* o = find_operation(id);
  if (o == nullptr) return std::nullopt;
  return static_cast<std::size_t>(o - operations.data());
}

const OperationSpec& AppModel::homepage() const {
  auto it = std::find_if(operations.begin(), operations.end(), [](const auto& o) { return o.is_homepage; });
  if (it == operations.end()) throw ValidationError("no homepage operation");
  return *it;
}

std::vector<Violation> validate_model(const AppModel& model) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  Duration max_urb{0};

  for (const auto& c : model.components) {
    if (!ids.insert(c.id).second) out.push_back({c.id, "duplicate component " + c.id});
    if (c.microreboot_duration <= Duration::zero())
      out.push_back({c.id, "microreboot_duration must be > 0 for " + c.id});
    if (c.kind == ComponentKind::servlet && c.session_state_policy != SessionStatePolicy::none)
      out.push_back({c.id, "servlet " + c.id + " must have session_state_policy none"});
    const auto& st = c.service_time;
    const bool bad_time = st.a_ms < 0 || (st.kind == ServiceTime::Kind::uniform && st.b_ms < st.a_ms) ||
                          (st.kind == ServiceTime::Kind::exponential && st.a_ms <= 0) || st.mean_ms() <= 0;
    if (bad_time) out.push_back({c.id, "service_time of " + c.id + " must have a positive mean"});
    max_urb = std::max(max_urb, c.microreboot_duration);
  }

  for (const auto& e : model.fault_map.edges) {
    const std::string label = e.source + "->" + e.target;
    if (!ids.contains(e.source)) out.push_back({e.source, "unresolved component " + e.source + " in edge " + label});
    if (!ids.contains(e.target)) out.push_back({e.target, "unresolved component " + e.target + " in edge " + label});
    if (e.source == e.target) out.push_back({label, "self edge " + label});
  }

  std::set<std::string> op_ids;
  std::size_t homepages = 0;
  for (const auto& op : model.operations) {
    if (!op_ids.insert(op.id).second) out.push_back({op.id, "duplicate operation " + op.id});
    if (op.is_homepage) ++homepages;
    if (op.path.empty()) {
      out.push_back({op.id, "operation " + op.id + " has an empty path"});
      continue;
    }
    for (const auto& hop : op.path) {
      if (!ids.contains(hop)) out.push_back({hop, "unresolved component " + hop});
    }
    if (const auto* front = model.find_component(op.path.front()); front && front->kind != ComponentKind::servlet)
      out.push_back({op.id, "operation " + op.id + " must start at a servlet, not " + front->id});
  }
  if (homepages == 0) out.push_back({"", "no homepage operation"});
  if (homepages > 1) out.push_back({"", "multiple homepage operations"});

  if (model.app_restart_duration < max_urb)
    out.push_back({"app_restart_ms", "app_restart_ms must be >= every microreboot_duration"});
  if (model.server_restart_duration < model.app_restart_duration)
    out.push_back({"server_restart_ms", "server_restart_ms must be >= app_restart_ms"});
  return out;
}

void require_valid(const AppModel& model) {
  const auto violations = validate_model(model);
  if (violations.empty()) return;
  std::string msg = "invalid application model:";
  for (const auto& v : violations) msg += "\n  " + v.message;
  throw ValidationError(msg);
}

std::vector<std::string> fault_closure(const AppModel& model, const std::vector<std::string>& seeds) {
  std::map<std::string_view, std::vector<std::string_view>> adjacency;
  for (const auto& e : model.fault_map.edges) adjacency[e.source].push_back(e.target);

  std::vector<std::string> order;
  std::set<std::string_view> seen;
  for (const auto& seed : seeds) {
    if (model.find_component(seed) == nullptr) throw UnknownComponentError(seed);
    // Explicit stack; neighbours pushed in reverse so they pop in edge order.
    std::vector<std::string_view> stack{seed};
    while (!stack.empty()) {
      const std::string_view node = stack.back();
      stack.pop_back();
      if (!seen.insert(node).second) continue;
      order.emplace_back(node);
      if (auto it = adjacency.find(node); it != adjacency.end()) {
        for (auto n = it->second.rbegin(); n != it->second.rend(); ++n) {
          if (!seen.contains(*n)) stack.push_back(*n);
        }
      }
    }
  }
  return order;
}

std::vector<std::string> fault_closure(const AppModel& model, std::string_view seed) {
  return fault_closure(model, std::vector<std::string>{std::string(seed)});
}

const std::vector<std::string>& route_for(const AppModel& model, std::string_view operation) {
  const auto* op = model.find_operation(operation);
  if (op == nullptr) throw UnknownOperationError(std::string(operation));
  return op->path;
}

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::servlet: return "servlet";
    case ComponentKind::stateless_bean: return "stateless-bean";
    case ComponentKind::stateful_session_bean: return "stateful-session-bean";
    case ComponentKind::entity_bean: return "entity-bean";
  }
  return "?";
}

std::string_view to_string(SessionStatePolicy policy) {
  switch (policy) {
    case SessionStatePolicy::none: return "none";
    case SessionStatePolicy::external_store: return "external-store";
    case SessionStatePolicy::in_memory_volatile: return "in-memory-volatile";
  }
  return "?";
}

namespace {

ComponentKind parse_kind(const std::string& s, const std::string& where) {
  for (auto k : {ComponentKind::servlet, ComponentKind::stateless_bean, ComponentKind::stateful_session_bean,
                 ComponentKind::entity_bean}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError(where + ": unknown component kind \"" + s + "\"");
}

SessionStatePolicy parse_policy(const std::string& s, const std::string& where) {
  for (auto p : {SessionStatePolicy::none, SessionStatePolicy::external_store, SessionStatePolicy::in_memory_volatile}) {
    if (to_string(p) == s) return p;
  }
  throw ValidationError(where + ": unknown session_state_policy \"" + s + "\"");
}

ServiceTime parse_service_time(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return ServiceTime::constant(j.get<double>());
  if (!j.is_object()) throw ValidationError(where + ": service_time must be a number or an object");
  const auto kind = detail::required<std::string>(j, "kind", where);
  if (kind == "constant") return ServiceTime::constant(detail::required<double>(j, "value", where));
  if (kind == "uniform")
    return ServiceTime::uniform(detail::required<double>(j, "min", where), detail::required<double>(j, "max", where));
  if (kind == "exponential") return ServiceTime::exponential(detail::required<double>(j, "mean", where));
  throw ValidationError(where + ": unknown service_time kind \"" + kind + "\"");
}

nlohmann::json service_time_json(const ServiceTime& st) {
  switch (st.kind) {
    case ServiceTime::Kind::constant: return st.a_ms;
    case ServiceTime::Kind::uniform: return {{"kind", "uniform"}, {"min", st.a_ms}, {"max", st.b_ms}};
    case ServiceTime::Kind::exponential: return {{"kind", "exponential"}, {"mean", st.a_ms}};
  }
  return nullptr;
}

}  // namespace

AppModel app_model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("model: document must be an object");
  AppModel m;
  const auto& comps = doc.at("components");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    const std::string where = "components[" + std::to_string(i) + "]";
    ComponentSpec spec;
    spec.id = detail::required<std::string>(c, "id", where);
    spec.kind = parse_kind(detail::required<std::string>(c, "kind", where), where);
    spec.service_time = c.contains("service_time") ? parse_service_time(c["service_time"], where) : ServiceTime{};
    spec.microreboot_duration = from_ms(detail::optional_or<double>(c, "microreboot_duration", 1000.0, where));
    spec.session_state_policy =
        parse_policy(detail::optional_or<std::string>(c, "session_state_policy", "none", where), where);
    m.components.push_back(std::move(spec));
  }
  const auto& ops = doc.at("operations");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& o = ops[i];
    const std::string where = "operations[" + std::to_string(i) + "]";
    OperationSpec op;
    op.id = detail::required<std::string>(o, "id", where);
    op.path = detail::required<std::vector<std::string>>(o, "path", where);
    op.is_db_write = detail::optional_or<bool>(o, "is_db_write", false, where);
    op.is_homepage = detail::optional_or<bool>(o, "is_homepage", false, where);
    m.operations.push_back(std::move(op));
  }
  if (doc.contains("fault_edges")) {
    for (const auto& e : doc["fault_edges"]) {
      if (!e.is_array() || e.size() != 2) throw ValidationError("fault_edges: each edge must be [source, target]");
      m.fault_map.edges.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
  }
  m.app_restart_duration = from_ms(detail::required<double>(doc, "app_restart_ms", "model"));
  m.server_restart_duration = from_ms(detail::required<double>(doc, "server_restart_ms", "model"));
  const auto redeploy = detail::optional_or<std::string>(doc, "redeploy", "parallel", "model");
  if (redeploy == "parallel") {
    m.redeploy = RedeployOrder::parallel;
  } else if (redeploy == "serial") {
    m.redeploy = RedeployOrder::serial;
  } else {
    throw ValidationError("model: redeploy must be \"parallel\" or \"serial\"");
  }
  return m;
}

nlohmann::json to_json(const AppModel& model) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : model.components) {
    comps.push_back({{"id", c.id},
                     {"kind", to_string(c.kind)},
                     {"service_time", service_time_json(c.service_time)},
                     {"microreboot_duration", to_ms(c.microreboot_duration)},
                     {"session_state_policy", to_string(c.session_state_policy)}});
  }
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& o : model.operations) {
    ops.push_back({{"id", o.id}, {"path", o.path}, {"is_db_write", o.is_db_write}, {"is_homepage", o.is_homepage}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : model.fault_map.edges) edges.push_back({e.source, e.target});
  return {{"components", comps},
          {"operations", ops},
          {"fault_edges", edges},
          {"app_restart_ms", to_ms(model.app_restart_duration)},
          {"server_restart_ms", to_ms(model.server_restart_duration)},
          {"redeploy", model.redeploy == RedeployOrder::serial ? "serial" : "parallel"}};
}

AppModel load_app_model(const std::filesystem::path& path) {
  try {
    return app_model_from_json(detail::read_json_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace urb
