// urbsim: run recovery experiments, compare reports, ingest access logs.
//
// Exit status: 0 success, 1 validation error, 2 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "urb/error.hpp"
#include "urb/ingest.hpp"
#include "urb/metrics.hpp"
#include "urb/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::uint32_t replicates = 1;
  std::string out;
  std::optional<double> bucket_ms;
};

struct CompareArgs {
  std::vector<std::string> reports;
  bool json = false;
  std::string out;
};

struct IngestArgs {
  std::string log;
  std::string config;
  std::string out;
  std::optional<double> bucket_ms;
};

struct ValidateArgs {
  std::string scenario;
};

void apply_overrides(urb::Scenario& s, const RunArgs& a) {
  if (a.seed) s.config.seed = *a.seed;
  if (a.bucket_ms) {
    if (!(*a.bucket_ms > 0)) throw urb::ValidationError("--bucket-ms must be > 0");
    s.bucket = urb::from_ms(*a.bucket_ms);
  }
}

int cmd_run(const RunArgs& a) {
  urb::Scenario s = urb::load_scenario(a.scenario);
  apply_overrides(s, a);
  const fs::path out = !a.out.empty() ? fs::path(a.out) : s.output_dir;
  if (out.empty()) throw urb::ValidationError("no output directory: pass --out or set output_dir");
  if (a.replicates < 1) throw urb::ValidationError("--replicates must be >= 1");

  if (a.replicates == 1) {
    const auto run = urb::run_scenario(s);
    urb::write_artifacts(out, run);
    std::cout << "requests " << run.report.requests_total << ", failed " << run.report.failed_requests_total
              << ", downtime " << run.report.perceived_downtime_s << " s -> " << out.string() << '\n';
    return 0;
  }

  const std::uint64_t base = s.config.seed;
  std::vector<urb::MetricsReport> reports;
  std::vector<std::uint64_t> seeds;
  for (std::uint32_t i = 0; i < a.replicates; ++i) {
    s.config.seed = base + i;
    const auto run = urb::run_scenario(s);
    urb::write_artifacts(out / ("seed-" + std::to_string(s.config.seed)), run);
    reports.push_back(run.report);
    seeds.push_back(s.config.seed);
  }
  const auto summary = urb::summarize(reports);
  std::ofstream f(out / "summary.json", std::ios::binary);
  if (!f) throw urb::Error("cannot write " + (out / "summary.json").string());
  f << urb::to_json(summary, seeds).dump(2) << '\n';
  for (const auto& m : summary) std::cout << m.metric << ' ' << m.mean << " +- " << m.stddev << '\n';
  return 0;
}

int cmd_compare(const CompareArgs& a) {
  std::vector<urb::MetricsReport> reports;
  for (const auto& p : a.reports) {
    reports.push_back(urb::read_report(p));
    if (reports.back().label.empty()) reports.back().label = fs::path(p).parent_path().filename().string();
  }
  const auto rows = urb::compare_table(reports);
  const std::string text = a.json ? urb::to_json(rows).dump(2) + "\n" : urb::render_table(rows);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw urb::Error("cannot write " + a.out);
    f << text;
  }
  return 0;
}

int cmd_ingest(const IngestArgs& a) {
  const urb::IngestConfig config = a.config.empty() ? urb::IngestConfig{} : urb::load_ingest_config(a.config);
  const auto result = urb::ingest_log(fs::path(a.log), config);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& e : result.errors) std::cerr << "skipped " << e << '\n';

  const fs::path out(a.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw urb::Error("cannot create " + out.string() + ": " + ec.message());
  urb::write_trace_csv(out / "trace.csv", result.trace);
  urb::ReportOptions opts;
  opts.label = fs::path(a.log).stem().string();
  if (a.bucket_ms) {
    if (!(*a.bucket_ms > 0)) throw urb::ValidationError("--bucket-ms must be > 0");
    opts.bucket = urb::from_ms(*a.bucket_ms);
  }
  const auto report = urb::build_report(result.trace, config.homepage, opts);
  urb::write_report(out / "report.json", report);
  urb::write_buckets_csv(out / "buckets.csv", report);
  std::cout << "rows " << result.rows_read << ", trace " << result.trace.size() << ", skipped " << result.errors.size()
            << " -> " << out.string() << '\n';
  return 0;
}

int cmd_validate(const ValidateArgs& a) {
  const urb::Scenario s = urb::load_scenario(a.scenario);
  const auto actions = urb::planned_actions(s);
  std::cout << "ok: " << s.model.components.size() << " components, " << s.model.operations.size()
            << " operations, " << s.faults.size() << " faults, " << actions.size() << " recovery actions\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microreboot recovery simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write trace.csv, report.json, buckets.csv");
  run_cmd->add_option("--scenario", run.scenario, "Scenario document")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--replicates", run.replicates, "Replicates with seeds seed, seed+1, ...");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--bucket-ms", run.bucket_ms, "Override the metrics bucket");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Tabulate reports; improvements relative to the first");
  cmp_cmd->add_option("reports", cmp.reports, "report.json files")->required();
  cmp_cmd->add_flag("--json", cmp.json, "Emit JSON instead of text");
  cmp_cmd->add_option("--out", cmp.out, "Write the table to a file");

  IngestArgs ing;
  auto* ing_cmd = app.add_subcommand("ingest", "Convert an access log to the canonical trace");
  ing_cmd->add_option("--log", ing.log, "Access log CSV")->required();
  ing_cmd->add_option("--config", ing.config, "Classifier config JSON");
  ing_cmd->add_option("--out", ing.out, "Output directory")->required();
  ing_cmd->add_option("--bucket-ms", ing.bucket_ms, "Metrics bucket");

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Check a scenario and the documents it references");
  val_cmd->add_option("--scenario", val.scenario, "Scenario document")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*cmp_cmd) return cmd_compare(cmp);
    if (*ing_cmd) return cmd_ingest(ing);
    if (*val_cmd) return cmd_validate(val);
  } catch (const urb::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
