#include "metaphor/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>

namespace metaphor {

namespace {

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

template <typename T>
T parse_number(std::string_view value, std::size_t line_no, std::string_view key) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw data_error("line " + std::to_string(line_no) + ": value '" + std::string(value) +
                     "' for '" + std::string(key) + "' is not a valid number");
  }
  return out;
}

double parse_real(std::string_view value, std::size_t line_no, std::string_view key) {
  try {
    std::size_t used = 0;
    const double out = std::stod(std::string(value), &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw data_error("line " + std::to_string(line_no) + ": value '" + std::string(value) +
                     "' for '" + std::string(key) + "' is not a valid number");
  }
}

bool parse_flag(std::string_view value, std::size_t line_no, std::string_view key) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw data_error("line " + std::to_string(line_no) + ": value '" + std::string(value) +
                   "' for '" + std::string(key) + "' must be true or false");
}

}  // namespace

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      throw data_error("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(stripped.substr(0, eq));
    const std::string_view value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw data_error("line " + std::to_string(line_no) + ": expected 'key = value'");
    }

    if (key == "vocabulary") base.vocabulary = parse_number<std::size_t>(value, line_no, key);
    else if (key == "m1") base.m1 = parse_number<Index>(value, line_no, key);
    else if (key == "iterations") base.iterations = parse_number<int>(value, line_no, key);
    else if (key == "tol") base.tol = parse_real(value, line_no, key);
    else if (key == "tol_streak") base.tol_streak = parse_number<int>(value, line_no, key);
    else if (key == "seed") base.seed = parse_number<std::uint64_t>(value, line_no, key);
    else if (key == "level") base.level = parse_number<Index>(value, line_no, key);
    else if (key == "top_k") base.top_k = parse_number<Index>(value, line_no, key);
    else if (key == "min_feature_count")
      base.min_feature_count = parse_number<std::int64_t>(value, line_no, key);
    else if (key == "exact_targets") base.exact_targets = parse_flag(value, line_no, key);
    else {
      throw data_error("line " + std::to_string(line_no) + ": unknown config key '" +
                       std::string(key) + "'");
    }
  }
  return base;
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open config file '" + path + "'");
  return parse_config(in, base);
}

nlohmann::json config_json(const RunConfig& config) {
  return {{"vocabulary", config.vocabulary},
          {"m1", config.m1},
          {"iterations", config.iterations},
          {"tol", config.tol},
          {"tol_streak", config.tol_streak},
          {"seed", config.seed},
          {"level", config.level},
          {"top_k", config.top_k},
          {"min_feature_count", config.min_feature_count},
          {"exact_targets", config.exact_targets}};
}

std::string config_hash(const RunConfig& config) {
  return hash_hex(config_json(config).dump()).substr(0, 8);
}

}  // namespace metaphor
