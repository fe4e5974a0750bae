#include "urb/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>

#include "json_io.hpp"
#include "urb/error.hpp"

namespace urb {

IngestConfig ingest_config_from_json(const nlohmann::json& doc) {
  constexpr std::string_view where = "ingest config";
  if (!doc.is_object()) throw ValidationError("ingest config: document must be an object");
  IngestConfig c;
  c.keywords = detail::optional_or<std::vector<std::string>>(doc, "keywords", c.keywords, where);
  c.homepage = detail::optional_or<std::string>(doc, "homepage", c.homepage, where);
  c.max_error_fraction = detail::optional_or<double>(doc, "max_error_fraction", c.max_error_fraction, where);
  if (c.homepage.empty()) throw ValidationError("ingest config: homepage must not be empty");
  if (!(c.max_error_fraction >= 0.0 && c.max_error_fraction <= 1.0))
    throw ValidationError("ingest config: max_error_fraction must be in [0, 1]");
  return c;
}

IngestConfig load_ingest_config(const std::filesystem::path& path) {
  const auto doc = detail::read_json_file(path);
  try {
    return ingest_config_from_json(doc);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string operation_from_url(std::string_view url, std::string_view homepage) {
  if (auto q = url.find_first_of("?#"); q != std::string_view::npos) url = url.substr(0, q);
  while (!url.empty() && url.back() == '/') url.remove_suffix(1);
  if (auto slash = url.rfind('/'); slash != std::string_view::npos) url = url.substr(slash + 1);
  if (auto dot = url.rfind('.'); dot != std::string_view::npos) {
    const auto ext = url.substr(dot + 1);
    // Drop short file extensions (".php", ".html"); keep dotted class names.
    if (!ext.empty() && ext.size() <= 4 &&
        std::all_of(ext.begin(), ext.end(), [](unsigned char ch) { return std::islower(ch); }))
      url = url.substr(0, dot);
  }
  if (url.empty()) return std::string(homepage);
  return std::string(url);
}

namespace {

struct Row {
  SimTime time;
  std::uint32_t client;
  std::string operation;
  Outcome outcome;
};

bool parse_time_ms(std::string_view s, SimTime& out) {
  double ms = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), ms);
  if (ec != std::errc{} || p != s.data() + s.size() || ms < 0) return false;
  out = from_ms(ms);
  return true;
}

}  // namespace

IngestResult ingest_log(std::istream& in, const IngestConfig& config) {
  const ResponseClassifier classifier(config.keywords);
  IngestResult result;
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.starts_with("timestamp_ms")) continue;
    ++result.rows_read;
    const auto f = split_csv_line(line);
    auto bad = [&](const std::string& msg) { result.errors.push_back("line " + std::to_string(lineno) + ": " + msg); };
    if (f.size() != 5) {
      bad("expected 5 columns, got " + std::to_string(f.size()));
      continue;
    }
    Row row;
    if (!parse_time_ms(f[0], row.time)) {
      bad("bad timestamp_ms \"" + f[0] + "\"");
      continue;
    }
    auto [cp, cec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), row.client);
    if (cec != std::errc{} || cp != f[1].data() + f[1].size()) {
      bad("bad client_id \"" + f[1] + "\"");
      continue;
    }
    if (f[2].empty()) {
      bad("empty url_or_operation");
      continue;
    }
    HttpResponse response;
    if (!f[3].empty()) {
      int status = 0;
      auto [sp, sec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), status);
      if (sec != std::errc{} || sp != f[3].data() + f[3].size() || status < 100 || status > 599) {
        bad("bad http_status \"" + f[3] + "\"");
        continue;
      }
      response.status = status;
    }
    response.body = f[4];
    row.operation = operation_from_url(f[2], config.homepage);
    row.outcome = classifier.classify(response) == Correctness::correct ? Outcome::ok : Outcome::failed;
    rows.push_back(std::move(row));
  }

  if (result.rows_read == 0) {
    result.warnings.emplace_back("log contains no data rows");
    return result;
  }
  const double fraction = static_cast<double>(result.errors.size()) / static_cast<double>(result.rows_read);
  if (fraction > config.max_error_fraction) {
    std::string msg = std::to_string(result.errors.size()) + " of " + std::to_string(result.rows_read) +
                      " rows malformed (limit " + std::to_string(config.max_error_fraction) + ")";
    for (std::size_t i = 0; i < std::min<std::size_t>(result.errors.size(), 5); ++i) msg += "\n  " + result.errors[i];
    throw ValidationError(msg);
  }
  if (!result.errors.empty())
    result.warnings.push_back(std::to_string(result.errors.size()) + " malformed rows skipped");

  // Time order per client drives session bracketing; ties keep file order.
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a].time < rows[b].time;
  });
  std::map<std::uint32_t, std::uint64_t> session_of;
  std::uint64_t next_session = 1;
  for (std::size_t i : order) {
    Row& row = rows[i];
    auto it = session_of.find(row.client);
    if (it == session_of.end() || row.operation == config.homepage) {
      session_of[row.client] = next_session++;
      it = session_of.find(row.client);
    }
    RequestRecord r;
    r.request_id = result.trace.size();
    r.client_id = row.client;
    r.session_id = it->second;
    r.operation = row.operation;
    r.start = row.time;
    r.end = row.time;
    r.outcome = row.outcome;
    result.trace.push_back(std::move(r));
  }
  return result;
}

IngestResult ingest_log(const std::filesystem::path& path, const IngestConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open file");
  return ingest_log(in, config);
}

}  // namespace urb
