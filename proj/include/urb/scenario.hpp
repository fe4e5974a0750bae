#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "urb/app_model.hpp"
#include "urb/metrics.hpp"
#include "urb/recovery_types.hpp"
#include "urb/sim_kernel.hpp"
#include "urb/workload.hpp"

namespace urb {

// A loaded experiment: documents resolved, faults and recovery plans parsed.
struct Scenario {
  std::filesystem::path model_path;
  std::filesystem::path workload_path;
  AppModel model;
  WorkloadModel workload;
  SimConfig config;
  std::vector<FaultSpec> faults;
  std::vector<RecoveryPlan> recoveries;
  Duration bucket{1'000'000};
  std::filesystem::path output_dir;  // empty: caller decides
  std::string label;
  std::optional<double> mttf_s;
  std::optional<double> mttr_s;
};

// Relative paths resolve against `base_dir`.
Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

// The actions the recovery plans expand to, in document order.
std::vector<RecoveryAction> planned_actions(const Scenario& scenario);

struct RunOutput {
  SimResult result;
  MetricsReport report;
};

RunOutput run_scenario(const Scenario& scenario);

// Writes trace.csv, report.json and buckets.csv into `dir`, creating it.
void write_artifacts(const std::filesystem::path& dir, const RunOutput& run);

struct Summary {
  std::string metric;
  double mean = 0;
  double stddev = 0;  // sample standard deviation; 0 for one replicate
};

// Mean and spread of the scalar metrics across replicate reports.
std::vector<Summary> summarize(const std::vector<MetricsReport>& reports);
nlohmann::json to_json(const std::vector<Summary>& summary, const std::vector<std::uint64_t>& seeds);

}  // namespace urb
