#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urb/time.hpp"
#include "urb/trace.hpp"

namespace urb {

struct SessionRecord {
  std::uint64_t session_id = 0;  // session id of the opening request
  std::uint32_t client_id = 0;
  std::vector<RequestRecord> requests;
  bool successful = true;  // every request ok or ok-after-retry
  bool aborted = false;    // failed and followed by a new session of the same client
  bool censored = false;   // the client's last session; the run cut it short
};

struct Sessionization {
  std::vector<SessionRecord> sessions;  // grouped by client, then time
  std::size_t skipped_rows = 0;         // rows with end < start
};

// Per client, a session opens at the first request and at every homepage
// request and runs until the next one.
Sessionization sessionize(std::span<const RequestRecord> trace, std::string_view homepage);

std::size_t sessions_total(std::span<const SessionRecord> sessions, bool include_censored = false);
std::size_t g_ses(std::span<const SessionRecord> sessions, bool include_censored = false);

struct BucketSeries {
  Duration bucket{1'000'000};
  std::vector<std::uint64_t> good;
  std::vector<std::uint64_t> failed;
};

// Number of buckets needed to hold every end time, and at least `horizon`.
std::size_t bucket_count(std::span<const RequestRecord> trace, Duration bucket, SimTime horizon = SimTime{0});

// Requests bucketed by end time, labeled by their own outcome.
BucketSeries raw_goodput(std::span<const RequestRecord> trace, Duration bucket, std::size_t buckets);

// Requests bucketed by end time; every request of an unsuccessful session
// counts as failed, including the ones that completed before the failure.
BucketSeries g_wop(std::span<const SessionRecord> sessions, Duration bucket, std::size_t buckets);

// Aborted sessions counted at the bucket of their first failed request.
std::vector<std::uint64_t> aborted_sessions_series(std::span<const SessionRecord> sessions, Duration bucket,
                                                   std::size_t buckets);

// Seconds covered by buckets holding at least one failed request.
double perceived_downtime(std::span<const RequestRecord> trace, Duration bucket = Duration{1'000'000});
// Seconds from the first to the last failing bucket, inclusive.
double downtime_span(std::span<const RequestRecord> trace, Duration bucket = Duration{1'000'000});

std::uint64_t failed_requests(std::span<const RequestRecord> trace);

double availability(double mttf, double mttr);

struct MetricsReport {
  std::string label;
  Duration bucket{1'000'000};
  std::vector<std::uint64_t> raw_good;
  std::vector<std::uint64_t> raw_failed;
  std::vector<std::uint64_t> gwop_good;
  std::vector<std::uint64_t> gwop_failed;
  std::vector<std::uint64_t> aborted_sessions;  // per bucket
  std::uint64_t requests_total = 0;
  std::uint64_t failed_requests_total = 0;
  std::uint64_t g_ses = 0;
  std::uint64_t sessions_total = 0;
  std::uint64_t sessions_censored = 0;
  std::uint64_t skipped_rows = 0;
  double perceived_downtime_s = 0;
  double downtime_span_s = 0;
  std::optional<double> mttf_s;
  std::optional<double> mttr_s;
  std::optional<double> availability;
};

struct ReportOptions {
  std::string label;
  Duration bucket{1'000'000};
  SimTime horizon{0};  // pad series to cover at least this long
  bool include_censored = false;
  std::optional<double> mttf_s;
  std::optional<double> mttr_s;
};

MetricsReport build_report(std::span<const RequestRecord> trace, std::string_view homepage,
                           const ReportOptions& options = {});

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& doc);
void write_report(const std::filesystem::path& path, const MetricsReport& report);
MetricsReport read_report(const std::filesystem::path& path);

inline constexpr std::string_view kBucketsHeader = "t,raw_good,raw_failed,gwop_good,gwop_failed,aborted_sessions";
void write_buckets_csv(std::ostream& out, const MetricsReport& report);
void write_buckets_csv(const std::filesystem::path& path, const MetricsReport& report);

// (reference - candidate) / reference; nullopt when the reference is 0.
std::optional<double> improvement(double reference, double candidate);

struct Improvement {
  std::optional<double> requests;
  std::optional<double> downtime;
};

Improvement compare(const MetricsReport& reference, const MetricsReport& candidate);

// "65%" (rounded), or "n/a" when undefined.
std::string format_percent(std::optional<double> fraction);

struct ComparisonRow {
  std::string label;
  std::uint64_t failed_requests = 0;
  double downtime_s = 0;
  Improvement vs_reference;
};

// Rows in input order; improvements relative to the first report. Throws
// SchemaMismatchError when bucket sizes differ and ValidationError on < 2.
std::vector<ComparisonRow> compare_table(std::span<const MetricsReport> reports);
std::string render_table(std::span<const ComparisonRow> rows);
nlohmann::json to_json(std::span<const ComparisonRow> rows);

}  // namespace urb
