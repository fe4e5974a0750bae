#include "urb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json_io.hpp"
#include "urb/error.hpp"

namespace urb {

namespace {

std::size_t bucket_of(SimTime t, Duration bucket) {
  return t < SimTime::zero() ? 0 : static_cast<std::size_t>(t / bucket);
}

void require_bucket(Duration bucket) {
  if (bucket <= Duration::zero()) throw ValidationError("bucket_ms must be > 0");
}

std::vector<bool> failing_buckets(std::span<const RequestRecord> trace, Duration bucket) {
  require_bucket(bucket);
  std::vector<bool> hit;
  for (const auto& r : trace) {
    if (is_good(r.outcome)) continue;
    const std::size_t b = bucket_of(r.end, bucket);
    if (b >= hit.size()) hit.resize(b + 1, false);
    hit[b] = true;
  }
  return hit;
}

}  // namespace

Sessionization sessionize(std::span<const RequestRecord> trace, std::string_view homepage) {
  Sessionization out;
  std::map<std::uint32_t, std::vector<const RequestRecord*>> by_client;
  for (const auto& r : trace) {
    if (r.end < r.start) {
      ++out.skipped_rows;
      continue;
    }
    by_client[r.client_id].push_back(&r);
  }
  for (auto& [client, rows] : by_client) {
    std::stable_sort(rows.begin(), rows.end(), [](const RequestRecord* a, const RequestRecord* b) {
      return a->start < b->start;
    });
    const std::size_t first = out.sessions.size();
    for (const RequestRecord* r : rows) {
      if (out.sessions.size() == first || r->operation == homepage) {
        SessionRecord s;
        s.session_id = r->session_id;
        s.client_id = client;
        out.sessions.push_back(std::move(s));
      }
      SessionRecord& s = out.sessions.back();
      s.requests.push_back(*r);
      if (!is_good(r->outcome)) s.successful = false;
    }
    if (out.sessions.size() > first) out.sessions.back().censored = true;
    for (std::size_t i = first; i < out.sessions.size(); ++i) {
      auto& s = out.sessions[i];
      s.aborted = !s.successful && !s.censored;
    }
  }
  return out;
}

std::size_t sessions_total(std::span<const SessionRecord> sessions, bool include_censored) {
  return static_cast<std::size_t>(std::count_if(sessions.begin(), sessions.end(), [&](const SessionRecord& s) {
    return include_censored || !s.censored;
  }));
}

std::size_t g_ses(std::span<const SessionRecord> sessions, bool include_censored) {
  return static_cast<std::size_t>(std::count_if(sessions.begin(), sessions.end(), [&](const SessionRecord& s) {
    return s.successful && (include_censored || !s.censored);
  }));
}

std::size_t bucket_count(std::span<const RequestRecord> trace, Duration bucket, SimTime horizon) {
  require_bucket(bucket);
  std::size_t n = static_cast<std::size_t>((horizon + bucket - Duration{1}) / bucket);
  for (const auto& r : trace) n = std::max(n, bucket_of(r.end, bucket) + 1);
  return n;
}

BucketSeries raw_goodput(std::span<const RequestRecord> trace, Duration bucket, std::size_t buckets) {
  require_bucket(bucket);
  BucketSeries s{bucket, std::vector<std::uint64_t>(buckets, 0), std::vector<std::uint64_t>(buckets, 0)};
  for (const auto& r : trace) {
    const std::size_t b = bucket_of(r.end, bucket);
    if (b >= buckets) continue;
    ++(is_good(r.outcome) ? s.good : s.failed)[b];
  }
  return s;
}

BucketSeries g_wop(std::span<const SessionRecord> sessions, Duration bucket, std::size_t buckets) {
  require_bucket(bucket);
  BucketSeries s{bucket, std::vector<std::uint64_t>(buckets, 0), std::vector<std::uint64_t>(buckets, 0)};
  for (const auto& session : sessions) {
    auto& series = session.successful ? s.good : s.failed;
    for (const auto& r : session.requests) {
      const std::size_t b = bucket_of(r.end, bucket);
      if (b < buckets) ++series[b];
    }
  }
  return s;
}

std::vector<std::uint64_t> aborted_sessions_series(std::span<const SessionRecord> sessions, Duration bucket,
                                                   std::size_t buckets) {
  require_bucket(bucket);
  std::vector<std::uint64_t> out(buckets, 0);
  for (const auto& s : sessions) {
    if (!s.aborted) continue;
    auto it = std::find_if(s.requests.begin(), s.requests.end(),
                           [](const RequestRecord& r) { return !is_good(r.outcome); });
    const std::size_t b = bucket_of(it->end, bucket);
    if (b < buckets) ++out[b];
  }
  return out;
}

double perceived_downtime(std::span<const RequestRecord> trace, Duration bucket) {
  const auto hit = failing_buckets(trace, bucket);
  return static_cast<double>(std::count(hit.begin(), hit.end(), true)) * to_seconds(bucket);
}

double downtime_span(std::span<const RequestRecord> trace, Duration bucket) {
  const auto hit = failing_buckets(trace, bucket);
  auto first = std::find(hit.begin(), hit.end(), true);
  if (first == hit.end()) return 0.0;
  const auto last = std::find(hit.rbegin(), hit.rend(), true);
  const auto width = static_cast<double>((hit.rend() - last) - (first - hit.begin()));
  return width * to_seconds(bucket);
}

std::uint64_t failed_requests(std::span<const RequestRecord> trace) {
  return static_cast<std::uint64_t>(
      std::count_if(trace.begin(), trace.end(), [](const RequestRecord& r) { return !is_good(r.outcome); }));
}

double availability(double mttf, double mttr) {
  if (!(mttf > 0) || !(mttr >= 0)) throw ValidationError("availability needs MTTF > 0 and MTTR >= 0");
  return mttf / (mttf + mttr);
}

MetricsReport build_report(std::span<const RequestRecord> trace, std::string_view homepage,
                           const ReportOptions& options) {
  require_bucket(options.bucket);
  const Sessionization sz = sessionize(trace, homepage);
  const std::size_t n = bucket_count(trace, options.bucket, options.horizon);
  const BucketSeries raw = raw_goodput(trace, options.bucket, n);
  const BucketSeries wop = g_wop(sz.sessions, options.bucket, n);

  MetricsReport r;
  r.label = options.label;
  r.bucket = options.bucket;
  r.raw_good = raw.good;
  r.raw_failed = raw.failed;
  r.gwop_good = wop.good;
  r.gwop_failed = wop.failed;
  r.aborted_sessions = aborted_sessions_series(sz.sessions, options.bucket, n);
  r.requests_total = trace.size();
  r.failed_requests_total = failed_requests(trace);
  r.g_ses = g_ses(sz.sessions, options.include_censored);
  r.sessions_total = sessions_total(sz.sessions, options.include_censored);
  r.sessions_censored = sz.sessions.size() - sessions_total(sz.sessions, false);
  r.skipped_rows = sz.skipped_rows;
  r.perceived_downtime_s = perceived_downtime(trace, options.bucket);
  r.downtime_span_s = downtime_span(trace, options.bucket);
  r.mttf_s = options.mttf_s;
  r.mttr_s = options.mttr_s;
  if (r.mttf_s && r.mttr_s) r.availability = availability(*r.mttf_s, *r.mttr_s);
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["label"] = r.label;
  j["bucket_ms"] = to_ms(r.bucket);
  j["requests_total"] = r.requests_total;
  j["failed_requests_total"] = r.failed_requests_total;
  j["perceived_downtime_s"] = r.perceived_downtime_s;
  j["downtime_span_s"] = r.downtime_span_s;
  j["g_ses"] = r.g_ses;
  j["sessions_total"] = r.sessions_total;
  j["sessions_censored"] = r.sessions_censored;
  j["skipped_rows"] = r.skipped_rows;
  j["mttf_s"] = r.mttf_s ? nlohmann::json(*r.mttf_s) : nlohmann::json();
  j["mttr_s"] = r.mttr_s ? nlohmann::json(*r.mttr_s) : nlohmann::json();
  j["availability"] = r.availability ? nlohmann::json(*r.availability) : nlohmann::json();
  j["raw_good"] = r.raw_good;
  j["raw_failed"] = r.raw_failed;
  j["gwop_good"] = r.gwop_good;
  j["gwop_failed"] = r.gwop_failed;
  j["aborted_sessions"] = r.aborted_sessions;
  std::vector<double> per_sec;
  for (auto a : r.aborted_sessions) per_sec.push_back(static_cast<double>(a) / to_seconds(r.bucket));
  j["aborted_sessions_per_sec"] = per_sec;
  return j;
}

MetricsReport report_from_json(const nlohmann::json& doc) {
  using detail::optional_or;
  using detail::required;
  constexpr std::string_view where = "report";
  if (!doc.is_object()) throw ValidationError("report: document must be an object");
  MetricsReport r;
  r.label = optional_or<std::string>(doc, "label", "", where);
  r.bucket = from_ms(required<double>(doc, "bucket_ms", where));
  require_bucket(r.bucket);
  r.requests_total = optional_or<std::uint64_t>(doc, "requests_total", 0, where);
  r.failed_requests_total = required<std::uint64_t>(doc, "failed_requests_total", where);
  r.perceived_downtime_s = required<double>(doc, "perceived_downtime_s", where);
  r.downtime_span_s = optional_or<double>(doc, "downtime_span_s", 0.0, where);
  r.g_ses = optional_or<std::uint64_t>(doc, "g_ses", 0, where);
  r.sessions_total = optional_or<std::uint64_t>(doc, "sessions_total", 0, where);
  r.sessions_censored = optional_or<std::uint64_t>(doc, "sessions_censored", 0, where);
  r.skipped_rows = optional_or<std::uint64_t>(doc, "skipped_rows", 0, where);
  if (doc.contains("mttf_s") && !doc["mttf_s"].is_null()) r.mttf_s = required<double>(doc, "mttf_s", where);
  if (doc.contains("mttr_s") && !doc["mttr_s"].is_null()) r.mttr_s = required<double>(doc, "mttr_s", where);
  if (doc.contains("availability") && !doc["availability"].is_null())
    r.availability = required<double>(doc, "availability", where);
  using Series = std::vector<std::uint64_t>;
  r.raw_good = optional_or<Series>(doc, "raw_good", {}, where);
  r.raw_failed = optional_or<Series>(doc, "raw_failed", {}, where);
  r.gwop_good = optional_or<Series>(doc, "gwop_good", {}, where);
  r.gwop_failed = optional_or<Series>(doc, "gwop_failed", {}, where);
  r.aborted_sessions = optional_or<Series>(doc, "aborted_sessions", {}, where);
  return r;
}

void write_report(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
}

MetricsReport read_report(const std::filesystem::path& path) {
  try {
    return report_from_json(detail::read_json_file(path));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_buckets_csv(std::ostream& out, const MetricsReport& r) {
  out << kBucketsHeader << '\n';
  const std::size_t n = r.raw_good.size();
  for (std::size_t i = 0; i < n; ++i) {
    out << format_ms(r.bucket * static_cast<std::int64_t>(i)) << ',' << r.raw_good[i] << ',' << r.raw_failed[i]
        << ',' << r.gwop_good[i] << ',' << r.gwop_failed[i] << ',' << r.aborted_sessions[i] << '\n';
  }
}

void write_buckets_csv(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_buckets_csv(out, report);
}

std::optional<double> improvement(double reference, double candidate) {
  if (reference == 0.0) return std::nullopt;
  return (reference - candidate) / reference;
}

Improvement compare(const MetricsReport& reference, const MetricsReport& candidate) {
  return {improvement(static_cast<double>(reference.failed_requests_total),
                      static_cast<double>(candidate.failed_requests_total)),
          improvement(reference.perceived_downtime_s, candidate.perceived_downtime_s)};
}

std::string format_percent(std::optional<double> fraction) {
  if (!fraction) return "n/a";
  const long long pct = std::llround(*fraction * 100.0);
  return std::to_string(pct) + "%";
}

std::vector<ComparisonRow> compare_table(std::span<const MetricsReport> reports) {
  if (reports.size() < 2) throw ValidationError("compare needs at least two reports");
  for (const auto& r : reports) {
    if (r.bucket != reports.front().bucket)
      throw SchemaMismatchError("schema mismatch: bucket_ms " + format_ms(r.bucket) + " vs " +
                                format_ms(reports.front().bucket));
  }
  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    rows.push_back({r.label.empty() ? "report " + std::to_string(i + 1) : r.label, r.failed_requests_total,
                    r.perceived_downtime_s, compare(reports.front(), r)});
  }
  return rows;
}

std::string render_table(std::span<const ComparisonRow> rows) {
  std::size_t w = std::string_view("Recovery").size();
  for (const auto& r : rows) w = std::max(w, r.label.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %15s  %14s  %13s  %13s\n", static_cast<int>(w), "Recovery",
                "Failed requests", "Downtime [sec]", "Requests impr", "Downtime impr");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-*s  %15llu  %14.0f  %13s  %13s\n", static_cast<int>(w), r.label.c_str(),
                  static_cast<unsigned long long>(r.failed_requests), r.downtime_s,
                  format_percent(r.vs_reference.requests).c_str(), format_percent(r.vs_reference.downtime).c_str());
    out << line;
  }
  return out.str();
}

nlohmann::json to_json(std::span<const ComparisonRow> rows) {
  auto opt = [](std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"label", r.label},
                 {"failed_requests", r.failed_requests},
                 {"downtime_s", r.downtime_s},
                 {"requests_improvement", opt(r.vs_reference.requests)},
                 {"downtime_improvement", opt(r.vs_reference.downtime)}});
  }
  return j;
}

}  // namespace urb
