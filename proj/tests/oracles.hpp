#pragma once

// Reference implementations used to check the library. They are written
// independently of src/ and favor obviousness over speed.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "urb/app_model.hpp"
#include "urb/trace.hpp"

namespace oracle {

// Breadth-first reachability from `seed` over the fault edges, seed included.
std::set<std::string> bfs_reachable(const urb::AppModel& model, const std::string& seed);

// Warshall transitive closure over an adjacency matrix; reflexive.
std::vector<std::vector<bool>> warshall(std::vector<std::vector<bool>> adj);

struct Sessions {
  // Per request id: the (client, ordinal) session it belongs to.
  std::map<std::uint64_t, std::pair<std::uint32_t, std::size_t>> member_of;
  // Per (client, ordinal): all requests good.
  std::map<std::pair<std::uint32_t, std::size_t>, bool> all_good;
  // Per client: number of sessions.
  std::map<std::uint32_t, std::size_t> count;
};

// Session ordinal of a request = number of homepage requests the client issued
// at or before it (minus one if the client's first request was a homepage).
Sessions bracket(const std::vector<urb::RequestRecord>& trace, const std::string& homepage);

std::size_t g_ses(const Sessions& s, bool include_censored);
std::size_t sessions_total(const Sessions& s, bool include_censored);

struct Labels {
  std::vector<std::uint64_t> good;
  std::vector<std::uint64_t> failed;
};

// Relabels every member of a failed session as failed, bucketed by end time.
Labels relabel(const std::vector<urb::RequestRecord>& trace, const Sessions& s, std::int64_t bucket_us,
               std::size_t buckets);

// Random trace for property checks: a few clients, arbitrary operations and
// outcomes, per-client time order.
std::vector<urb::RequestRecord> random_trace(std::uint64_t seed, const std::string& homepage);

// Random model with `nodes` components and `edges` distinct fault edges.
urb::AppModel random_model(std::uint64_t seed, std::size_t nodes, std::size_t edges);

}  // namespace oracle
