#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urb/rng.hpp"
#include "urb/time.hpp"

namespace urb {

struct AppModel;

inline constexpr std::string_view kBackState = "Back";
inline constexpr std::string_view kEndState = "End";

// Client-emulator transition table over operation states plus the Back and
// End pseudo-states. transition[a][b] is the probability of moving a -> b.
struct WorkloadModel {
  std::vector<std::string> states;
  std::vector<std::vector<double>> transition;
  std::vector<Duration> think_time;  // per state, applied after a request completes
  std::string homepage;
  bool back_issues_request = false;  // replay the popped page against the server

  std::size_t state_index(std::string_view name) const;  // throws UnknownOperationError
  std::optional<std::size_t> find_state(std::string_view name) const;
  std::size_t back_index() const { return state_index(kBackState); }
  std::size_t end_index() const { return state_index(kEndState); }
  std::size_t homepage_index() const { return state_index(homepage); }
  bool is_pseudo(std::size_t state) const;

  void set(std::string_view from, std::string_view to, double p);
};

struct WorkloadViolation {
  std::string state;
  std::string message;
};

// Row sums within 1e-9, probabilities in [0,1], End only to the homepage,
// every operation state known to `app` when given. The Back row is unused.
std::vector<WorkloadViolation> validate_workload(const WorkloadModel& model, const AppModel* app = nullptr);

// Builds an empty table over `operations` + Back + End. The End row is preset
// to the homepage.
WorkloadModel make_workload(const std::vector<std::string>& operations, std::string homepage);

WorkloadModel workload_from_json(const nlohmann::json& doc, const AppModel& app);
nlohmann::json to_json(const WorkloadModel& model);
WorkloadModel load_workload(const std::filesystem::path& path, const AppModel& app);

struct ClientState {
  std::uint32_t client_id = 0;
  std::size_t current = 0;              // index of the last visited operation state
  std::vector<std::size_t> nav_stack;   // prior operation states, for Back
  std::uint64_t session_id = 0;
  Rng rng;
};

// Samples T(current) with the client's stream. Throws InvalidRowError when the
// row is not a probability distribution.
std::size_t next_state(ClientState& client, const WorkloadModel& model);

struct ClientAction {
  enum class Kind { request, back, new_session };

  Kind kind = Kind::request;
  std::size_t state = 0;      // operation state to request (or returned to, for Back)
  bool issues_request = true;
};

// Advances the client by one transition. Requests for the homepage (via End,
// Back on an empty stack, or a direct transition) open a new session whose id
// is taken from `next_session_id`.
ClientAction step_client(ClientState& client, const WorkloadModel& model, std::uint64_t& next_session_id);

// Puts a fresh client at the homepage with a new session.
ClientState make_client(std::uint32_t client_id, const WorkloadModel& model, std::uint64_t seed,
                        std::uint64_t& next_session_id);

// Response classification for external traces.
struct HttpResponse {
  std::optional<int> status;  // nullopt: network-level error
  std::string body;
};

enum class Correctness { correct, incorrect };

class ResponseClassifier {
 public:
  ResponseClassifier();
  explicit ResponseClassifier(std::vector<std::string> keywords);

  Correctness classify(const HttpResponse& response) const;
  const std::vector<std::string>& keywords() const { return keywords_; }

 private:
  std::vector<std::string> keywords_;  // stored lower-case
};

}  // namespace urb
