#pragma once

// Internal helpers shared by the document loaders.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "urb/error.hpp"

namespace urb::detail {

// Reads and parses a JSON document. Parse failures become ParseError with a
// "path:line:column: message" prefix.
nlohmann::json read_json_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

template <typename T>
T required(const nlohmann::json& obj, std::string_view key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(std::string(where) + ": missing key \"" + std::string(key) + "\"");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(where) + ": bad value for \"" + std::string(key) + "\": " + e.what());
  }
}

template <typename T>
T optional_or(const nlohmann::json& obj, std::string_view key, T fallback, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(where) + ": bad value for \"" + std::string(key) + "\": " + e.what());
  }
}

}  // namespace urb::detail
