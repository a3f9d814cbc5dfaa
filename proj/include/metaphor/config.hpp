#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "metaphor/common.hpp"

namespace metaphor {

// Everything a run needs to be reproduced. Serialized in full into every
// artifact's provenance block.
struct RunConfig {
  std::size_t vocabulary = 2000;
  Index m1 = 800;
  int iterations = 1000;
  double tol = 1e-7;
  int tol_streak = 10;
  std::uint64_t seed = 0;
  Index level = 3;
  Index top_k = 6;
  std::int64_t min_feature_count = 1;
  bool exact_targets = false;
};

// `key = value` lines over `base`; '#' comments allowed, unknown keys fail.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig parse_config_file(const std::string& path, RunConfig base = {});

nlohmann::json config_json(const RunConfig& config);

// Short stable digest used in default run directory names.
std::string config_hash(const RunConfig& config);

}  // namespace metaphor
