#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metaphor/config.hpp"

namespace metaphor {

// Interpretive choices baked into this implementation, embedded in every
// artifact so results stay traceable to them.
std::vector<std::string> decision_record();

// Default run directory: runs/<UTC stamp>-<config hash>. Timestamps never
// appear inside output files, only in this default directory name.
std::filesystem::path default_run_dir(const RunConfig& config);

// One noun per line, '#' comments allowed.
std::vector<std::string> read_source_list(const std::filesystem::path& path);

// Each command writes its artifacts under out_dir (created if needed) and
// returns the primary artifact path. All of them throw data_error or
// numerical_error; the CLI maps those to exit codes.

std::filesystem::path cmd_ingest(const std::filesystem::path& triples_path,
                                 const RunConfig& config,
                                 const std::filesystem::path& out_dir);

std::filesystem::path cmd_train(const std::filesystem::path& features_path,
                                const RunConfig& config, const std::filesystem::path& out_dir,
                                const std::filesystem::path& w_cache = {});

std::filesystem::path cmd_baseline(const std::filesystem::path& features_path,
                                   const std::filesystem::path& graph_path,
                                   const RunConfig& config,
                                   const std::filesystem::path& out_dir);

struct QueryOutput {
  std::filesystem::path json;
  std::filesystem::path report;
};

QueryOutput cmd_query(const std::filesystem::path& archive_path,
                      const std::vector<std::string>& sources, const RunConfig& config,
                      const std::filesystem::path& out_dir);

QueryOutput cmd_eval(const std::vector<std::filesystem::path>& mappings_paths,
                     const std::vector<std::filesystem::path>& judgment_paths,
                     const std::optional<std::filesystem::path>& gold_path,
                     const RunConfig& config, const std::filesystem::path& out_dir);

std::filesystem::path cmd_export(const std::filesystem::path& archive_path,
                                 const std::filesystem::path& out_dir);

}  // namespace metaphor
