#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urb/trace.hpp"
#include "urb/workload.hpp"

namespace urb {

// Turns an external access log into the canonical trace schema.
// Input columns: timestamp_ms,client_id,url_or_operation,http_status,body_flags
// An empty http_status is a network-level error.
struct IngestConfig {
  std::vector<std::string> keywords{"error", "failed", "exception"};
  std::string homepage = "Home";
  double max_error_fraction = 0.1;  // malformed rows tolerated before giving up
};

IngestConfig ingest_config_from_json(const nlohmann::json& doc);
IngestConfig load_ingest_config(const std::filesystem::path& path);

inline constexpr std::string_view kLogHeader = "timestamp_ms,client_id,url_or_operation,http_status,body_flags";

struct IngestResult {
  std::vector<RequestRecord> trace;
  std::vector<std::string> errors;    // "line N: message"
  std::vector<std::string> warnings;
  std::size_t rows_read = 0;          // data rows, malformed included
};

// "/rubis/servlet/ViewItem?id=3" -> "ViewItem"; "/" -> homepage.
std::string operation_from_url(std::string_view url, std::string_view homepage);

// Throws ValidationError when the malformed fraction exceeds the threshold.
IngestResult ingest_log(std::istream& in, const IngestConfig& config);
IngestResult ingest_log(const std::filesystem::path& path, const IngestConfig& config);

}  // namespace urb
