#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "urb/time.hpp"

namespace urb {

enum class Outcome { ok, ok_after_retry, failed, connection_refused, connection_dropped };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);

inline bool is_good(Outcome o) { return o == Outcome::ok || o == Outcome::ok_after_retry; }

struct RequestRecord {
  std::uint64_t request_id = 0;
  std::uint32_t client_id = 0;
  std::uint64_t session_id = 0;
  std::string operation;
  SimTime start{0};
  SimTime end{0};
  Outcome outcome = Outcome::ok;
  std::uint32_t retries = 0;
  bool is_db_write = false;  // not part of the CSV schema

  Duration latency() const { return end - start; }
  bool operator==(const RequestRecord&) const = default;
};

inline constexpr std::string_view kTraceHeader =
    "request_id,client_id,session_id,operation,start_ms,end_ms,outcome,retries";

void write_trace_csv(std::ostream& out, std::span<const RequestRecord> trace);
void write_trace_csv(const std::filesystem::path& path, std::span<const RequestRecord> trace);

struct TraceReadResult {
  std::vector<RequestRecord> records;
  std::vector<std::string> errors;  // "line N: message" for skipped rows
};

// Reads the canonical trace CSV. Malformed rows are skipped and reported.
TraceReadResult read_trace_csv(std::istream& in);
TraceReadResult read_trace_csv(const std::filesystem::path& path);

// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace urb
