#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaphor/agglomerative.hpp"
#include "metaphor/hierarchy.hpp"

namespace metaphor {

// Single-file container: 8-byte magic, 8-byte little-endian manifest length,
// JSON manifest, then a raw payload region of named chunks. Every chunk and
// the whole payload carry content hashes the reader verifies.
inline constexpr char kArchiveMagic[8] = {'M', 'G', 'A', 'R', 'C', 'H', '0', '1'};

class ArchiveWriter {
 public:
  explicit ArchiveWriter(std::string kind);

  nlohmann::json& manifest() { return manifest_; }

  void add_matrix(const std::string& name, const Matrix<double>& values);  // row-major f64
  void add_vector(const std::string& name, const Vector<double>& values);
  void add_i64(const std::string& name, const std::vector<std::int64_t>& values);

  void save(const std::filesystem::path& path);

 private:
  void add_chunk(const std::string& name, const char* kind, Index rows, Index cols,
                 const void* data, std::size_t bytes);

  nlohmann::json manifest_;
  std::string payload_;
};

class ArchiveReader {
 public:
  explicit ArchiveReader(const std::filesystem::path& path);

  const nlohmann::json& manifest() const { return manifest_; }
  std::string kind() const;
  bool has_chunk(const std::string& name) const;

  Matrix<double> read_matrix(const std::string& name) const;
  Vector<double> read_vector(const std::string& name) const;
  std::vector<std::int64_t> read_i64(const std::string& name) const;

 private:
  struct Chunk {
    std::string kind;
    Index rows = 0;
    Index cols = 0;
    std::size_t offset = 0;
    std::size_t bytes = 0;
  };
  const Chunk& chunk(const std::string& name, const char* expected_kind) const;

  std::filesystem::path path_;
  nlohmann::json manifest_;
  std::string payload_;
  std::map<std::string, Chunk> chunks_;
};

// FNV-1a hash of a file's bytes, used to pin artifacts to their inputs.
std::string file_content_hash(const std::filesystem::path& path);

// Graph and feature artifacts. `extra` lands in the manifest under
// "provenance" so every artifact records how it was produced.

void save_graph(const ConceptGraph& graph, const std::filesystem::path& path,
                const nlohmann::json& extra);
ConceptGraph load_graph(const std::filesystem::path& path);

void save_baseline(const BaselineGraph& graph, const std::filesystem::path& path,
                   const nlohmann::json& extra);
BaselineGraph load_baseline(const std::filesystem::path& path);

void save_features(const FeatureMatrix& features, const std::filesystem::path& path,
                   const nlohmann::json& extra);
FeatureMatrix load_features(const std::filesystem::path& path);

}  // namespace metaphor
