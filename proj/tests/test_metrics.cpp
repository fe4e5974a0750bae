#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "urb/error.hpp"
#include "urb/metrics.hpp"
#include "urb/scenario.hpp"

namespace {

using urb::from_ms;
using urb::Outcome;

const std::string kData = URB_DATA_DIR;

std::vector<urb::RequestRecord> trace_of(std::vector<std::tuple<std::uint32_t, std::string, double, double, Outcome>> rows) {
  std::vector<urb::RequestRecord> t;
  for (auto& [client, op, start, end, outcome] : rows) {
    urb::RequestRecord r;
    r.request_id = t.size();
    r.client_id = client;
    r.operation = op;
    r.start = from_ms(start);
    r.end = from_ms(end);
    r.outcome = outcome;
    t.push_back(r);
  }
  return t;
}

TEST(Sessionize, Empty) {
  const auto s = urb::sessionize({}, "Home");
  EXPECT_TRUE(s.sessions.empty());
  EXPECT_EQ(urb::g_ses(s.sessions), 0u);
}

TEST(Sessionize, HomepageBracketing) {
  const auto t = trace_of({{0, "Home", 0, 1, Outcome::ok},
                           {0, "Browse", 1, 2, Outcome::ok},
                           {0, "Home", 2, 3, Outcome::ok},
                           {0, "PutBid", 3, 4, Outcome::failed}});
  const auto s = urb::sessionize(t, "Home");
  ASSERT_EQ(s.sessions.size(), 2u);
  EXPECT_TRUE(s.sessions[0].successful);
  EXPECT_FALSE(s.sessions[1].successful);
  EXPECT_EQ(s.sessions[0].requests.size(), 2u);
  EXPECT_TRUE(s.sessions[1].censored);
  EXPECT_FALSE(s.sessions[1].aborted);
  EXPECT_EQ(urb::g_ses(s.sessions, true), 1u);
  EXPECT_EQ(urb::sessions_total(s.sessions, true), 2u);
}

TEST(Sessionize, FailedSessionFollowedByNewOneIsAborted) {
  const auto t = trace_of({{0, "Home", 0, 1, Outcome::ok},
                           {0, "PutBid", 1, 2, Outcome::failed},
                           {0, "Browse", 2, 3, Outcome::ok},
                           {0, "Home", 3, 4, Outcome::ok},
                           {1, "Browse", 0, 5, Outcome::ok_after_retry}});
  const auto s = urb::sessionize(t, "Home");
  ASSERT_EQ(s.sessions.size(), 3u);
  EXPECT_TRUE(s.sessions[0].aborted);
  EXPECT_EQ(urb::sessions_total(s.sessions), 1u);
  EXPECT_EQ(urb::g_ses(s.sessions), 0u);
  EXPECT_EQ(urb::g_ses(s.sessions, true), 2u);  // ok-after-retry counts as success
  const auto ab = urb::aborted_sessions_series(s.sessions, from_ms(1), 6);
  EXPECT_EQ(ab, (std::vector<std::uint64_t>{0, 0, 1, 0, 0, 0}));  // at the first failure's end
}

TEST(Sessionize, MalformedRowsAreSkipped) {
  const auto t = trace_of({{0, "Home", 5, 1, Outcome::ok}, {0, "Home", 6, 7, Outcome::ok}});
  const auto s = urb::sessionize(t, "Home");
  EXPECT_EQ(s.skipped_rows, 1u);
  EXPECT_EQ(s.sessions.size(), 1u);
}

TEST(Sessionize, LosslessPerClientPartition) {
  for (int seed = 0; seed < 100; ++seed) {
    const auto t = oracle::random_trace(static_cast<std::uint64_t>(seed), "Home");
    const auto s = urb::sessionize(t, "Home");
    std::map<std::uint32_t, std::vector<std::uint64_t>> concat;
    for (const auto& sess : s.sessions)
      for (const auto& r : sess.requests) concat[r.client_id].push_back(r.request_id);
    std::map<std::uint32_t, std::vector<std::uint64_t>> expect;
    for (const auto& r : t) expect[r.client_id].push_back(r.request_id);
    EXPECT_EQ(concat, expect);
  }
}

TEST(GSes, OneFailureCostsOneSession) {
  const auto t = trace_of({{0, "Home", 0, 1, Outcome::ok},
                           {0, "Home", 1, 2, Outcome::ok},
                           {0, "Browse", 2, 3, Outcome::connection_refused},
                           {0, "Home", 3, 4, Outcome::ok},
                           {0, "Home", 4, 5, Outcome::ok}});
  const auto s = urb::sessionize(t, "Home");
  EXPECT_EQ(urb::sessions_total(s.sessions), 3u);
  EXPECT_EQ(urb::g_ses(s.sessions), 2u);
}

TEST(GSes, MatchesBruteForce) {
  for (int seed = 0; seed < 200; ++seed) {
    const auto t = oracle::random_trace(static_cast<std::uint64_t>(seed) + 5000, "Home");
    const auto s = urb::sessionize(t, "Home");
    const auto ref = oracle::bracket(t, "Home");
    EXPECT_EQ(urb::g_ses(s.sessions), oracle::g_ses(ref, false));
    EXPECT_EQ(urb::g_ses(s.sessions, true), oracle::g_ses(ref, true));
  }
}

TEST(GWop, IdentityWithoutFailures) {
  auto t = oracle::random_trace(3, "Home");
  for (auto& r : t) r.outcome = Outcome::ok;
  const auto s = urb::sessionize(t, "Home");
  const auto n = urb::bucket_count(t, from_ms(1000));
  const auto raw = urb::raw_goodput(t, from_ms(1000), n);
  const auto wop = urb::g_wop(s.sessions, from_ms(1000), n);
  EXPECT_EQ(raw.good, wop.good);
  EXPECT_EQ(raw.failed, wop.failed);
}

TEST(GWop, FailedSessionRelabelsEarlierRequests) {
  // One session spanning 95-105 s that fails after a fault at 100 s.
  const auto t = trace_of({{0, "Home", 95000, 95100, Outcome::ok},
                           {0, "Browse", 97000, 97100, Outcome::ok},
                           {0, "Search", 101000, 101100, Outcome::failed},
                           {0, "Home", 105000, 105100, Outcome::ok}});
  const auto s = urb::sessionize(t, "Home");
  const auto wop = urb::g_wop(s.sessions, from_ms(1000), 106);
  EXPECT_EQ(wop.failed[95], 1u);
  EXPECT_EQ(wop.failed[97], 1u);
  EXPECT_EQ(wop.good[95], 0u);
  const auto raw = urb::raw_goodput(t, from_ms(1000), 106);
  EXPECT_EQ(raw.good[95], 1u);
}

TEST(GWop, MatchesRelabelingOracle) {
  for (int seed = 0; seed < 200; ++seed) {
    const auto t = oracle::random_trace(static_cast<std::uint64_t>(seed) + 9000, "Home");
    const auto s = urb::sessionize(t, "Home");
    const auto n = urb::bucket_count(t, from_ms(250));
    const auto wop = urb::g_wop(s.sessions, from_ms(250), n);
    const auto ref = oracle::relabel(t, oracle::bracket(t, "Home"), 250000, n);
    EXPECT_EQ(wop.good, ref.good);
    EXPECT_EQ(wop.failed, ref.failed);
  }
}

TEST(Downtime, NoFailures) { EXPECT_EQ(urb::perceived_downtime({}), 0.0); }

TEST(Downtime, ContiguousWindowOf24Buckets) {
  std::vector<std::tuple<std::uint32_t, std::string, double, double, Outcome>> rows;
  for (int b = 10; b <= 33; ++b) rows.push_back({0, "Op", b * 1000.0, b * 1000.0 + 500, Outcome::failed});
  rows.push_back({0, "Op", 50000, 50500, Outcome::ok});
  const auto t = trace_of(rows);
  EXPECT_EQ(urb::perceived_downtime(t), 24.0);
  EXPECT_EQ(urb::downtime_span(t), 24.0);
}

TEST(Downtime, SparseBucketsCountNotSpan) {
  const auto t = trace_of({{0, "Op", 2000, 2100, Outcome::failed},
                           {0, "Op", 2200, 2300, Outcome::failed},
                           {1, "Op", 40000, 40100, Outcome::failed},
                           {1, "Op", 90000, 90999, Outcome::failed}});
  EXPECT_EQ(urb::perceived_downtime(t), 3.0);
  EXPECT_EQ(urb::downtime_span(t), 89.0);
}

TEST(Compare, TableOneFigures) {
  EXPECT_EQ(urb::format_percent(urb::improvement(713, 251)), "65%");
  EXPECT_EQ(urb::format_percent(urb::improvement(108, 24)), "78%");
  EXPECT_EQ(urb::format_percent(urb::improvement(713, 615)), "14%");
  EXPECT_EQ(urb::format_percent(urb::improvement(108, 94)), "13%");
  EXPECT_EQ(urb::format_percent(urb::improvement(713, 345)), "52%");
  EXPECT_EQ(urb::format_percent(urb::improvement(108, 29)), "73%");
  EXPECT_EQ(urb::format_percent(urb::improvement(713, 713)), "0%");
  EXPECT_FALSE(urb::improvement(0, 5));
  EXPECT_EQ(urb::format_percent(std::nullopt), "n/a");
}

TEST(Compare, TableRequiresMatchingBuckets) {
  urb::MetricsReport a;
  a.label = "a";
  a.failed_requests_total = 10;
  a.perceived_downtime_s = 4;
  auto b = a;
  EXPECT_THROW(urb::compare_table(std::vector<urb::MetricsReport>{a}), urb::ValidationError);
  const auto rows = urb::compare_table(std::vector<urb::MetricsReport>{a, b});
  EXPECT_EQ(*rows[1].vs_reference.requests, 0.0);
  b.bucket = from_ms(500);
  EXPECT_THROW(urb::compare_table(std::vector<urb::MetricsReport>{a, b}), urb::SchemaMismatchError);
}

TEST(Availability, Formula) {
  EXPECT_DOUBLE_EQ(urb::availability(999, 1), 0.999);
  EXPECT_THROW(urb::availability(0, 1), urb::ValidationError);
  urb::ReportOptions o;
  o.mttf_s = 3600;
  o.mttr_s = 24;
  EXPECT_DOUBLE_EQ(*urb::build_report({}, "Home", o).availability, 3600.0 / 3624.0);
}

TEST(Report, InvariantsOnSimulatedRun) {
  const auto s = urb::load_scenario(kData + "/scenarios/table1-ejb3.json");
  const auto run = urb::run_scenario(s);
  const auto& r = run.report;
  std::uint64_t raw = 0;
  std::uint64_t wop = 0;
  for (std::size_t i = 0; i < r.raw_good.size(); ++i) {
    EXPECT_LE(r.gwop_good[i], r.raw_good[i]);
    EXPECT_GE(r.gwop_failed[i], r.raw_failed[i]);
    raw += r.raw_good[i] + r.raw_failed[i];
    wop += r.gwop_good[i] + r.gwop_failed[i];
  }
  EXPECT_EQ(raw, r.requests_total);
  EXPECT_EQ(wop, r.requests_total);
  EXPECT_LE(r.g_ses, r.sessions_total);
  const auto sz = urb::sessionize(run.result.trace, "Home");
  std::size_t with_failure = 0;
  for (const auto& x : sz.sessions) with_failure += !x.censored && !x.successful;
  EXPECT_EQ(r.g_ses, r.sessions_total - with_failure);
}

TEST(Report, JsonRoundTripAndBuckets) {
  const auto t = trace_of({{0, "Home", 0, 1, Outcome::ok}, {0, "Browse", 1, 1500, Outcome::failed}});
  urb::ReportOptions o;
  o.label = "x";
  o.horizon = from_ms(3000);
  const auto r = urb::build_report(t, "Home", o);
  EXPECT_EQ(r.raw_good.size(), 3u);
  const auto back = urb::report_from_json(urb::to_json(r));
  EXPECT_EQ(urb::to_json(back), urb::to_json(r));
  std::ostringstream csv;
  urb::write_buckets_csv(csv, r);
  EXPECT_EQ(csv.str(), std::string(urb::kBucketsHeader) +
                           "\n0.000,1,0,0,1,0\n1000.000,0,1,0,1,0\n2000.000,0,0,0,0,0\n");
}

}  // namespace
