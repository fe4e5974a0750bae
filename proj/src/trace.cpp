#include "urb/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "urb/error.hpp"

namespace urb {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::ok: return "ok";
    case Outcome::ok_after_retry: return "ok-after-retry";
    case Outcome::failed: return "failed";
    case Outcome::connection_refused: return "connection-refused";
    case Outcome::connection_dropped: return "connection-dropped";
  }
  return "?";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (auto o : {Outcome::ok, Outcome::ok_after_retry, Outcome::failed, Outcome::connection_refused,
                 Outcome::connection_dropped}) {
    if (to_string(o) == text) return o;
  }
  return std::nullopt;
}

void write_trace_csv(std::ostream& out, std::span<const RequestRecord> trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.request_id << ',' << r.client_id << ',' << r.session_id << ',' << r.operation << ','
        << format_ms(r.start) << ',' << format_ms(r.end) << ',' << to_string(r.outcome) << ',' << r.retries << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, std::span<const RequestRecord> trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_trace_csv(out, trace);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

namespace {

template <typename T>
bool parse_int(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

// Parses "123.456" milliseconds into exact microseconds.
bool parse_ms(std::string_view s, SimTime& out) {
  const bool negative = !s.empty() && s.front() == '-';
  if (negative) s.remove_prefix(1);
  const auto dot = s.find('.');
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  if (!parse_int(s.substr(0, dot), whole)) return false;
  if (dot != std::string_view::npos) {
    std::string digits(s.substr(dot + 1));
    if (digits.empty() || digits.size() > 3) return false;
    while (digits.size() < 3) digits += '0';
    if (!parse_int(std::string_view(digits), frac)) return false;
  }
  const std::int64_t us = whole * 1000 + frac;
  out = SimTime{negative ? -us : us};
  return true;
}

}  // namespace

TraceReadResult read_trace_csv(std::istream& in) {
  TraceReadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == kTraceHeader) continue;
    const auto f = split_csv_line(line);
    RequestRecord r;
    std::optional<Outcome> outcome;
    const bool ok = f.size() == 8 && parse_int(f[0], r.request_id) && parse_int(f[1], r.client_id) &&
                    parse_int(f[2], r.session_id) && !f[3].empty() && parse_ms(f[4], r.start) &&
                    parse_ms(f[5], r.end) && (outcome = parse_outcome(f[6])) && parse_int(f[7], r.retries);
    if (!ok) {
      result.errors.push_back("line " + std::to_string(lineno) + ": malformed trace row");
      continue;
    }
    r.operation = f[3];
    r.outcome = *outcome;
    result.records.push_back(std::move(r));
  }
  return result;
}

TraceReadResult read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open file");
  return read_trace_csv(in);
}

}  // namespace urb
