#include "metaphor/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "archive payloads are written in the host's little-endian layout");

namespace metaphor {

using nlohmann::json;

namespace {

[[noreturn]] void fail_archive(const std::filesystem::path& path, const std::string& what) {
  throw data_error("archive '" + path.string() + "': " + what +
                   "; re-create it with the command that produced it");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw data_error("cannot open '" + path.string() + "'; check the path or re-run the producing command");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace

ArchiveWriter::ArchiveWriter(std::string kind) {
  manifest_["format"] = "mga-1";
  manifest_["kind"] = std::move(kind);
  manifest_["payload"]["chunks"] = json::array();
}

void ArchiveWriter::add_chunk(const std::string& name, const char* kind, Index rows, Index cols,
                              const void* data, std::size_t bytes) {
  ContentHash hash;
  hash.update(data, bytes);
  json chunk;
  chunk["name"] = name;
  chunk["kind"] = kind;
  chunk["rows"] = rows;
  chunk["cols"] = cols;
  chunk["offset"] = payload_.size();
  chunk["bytes"] = bytes;
  chunk["hash"] = hash.hex();
  manifest_["payload"]["chunks"].push_back(std::move(chunk));
  if (bytes > 0) payload_.append(static_cast<const char*>(data), bytes);
}

void ArchiveWriter::add_matrix(const std::string& name, const Matrix<double>& values) {
  std::vector<double> row_major;
  row_major.reserve(static_cast<std::size_t>(values.size()));
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) row_major.push_back(values(i, j));
  }
  add_chunk(name, "f64", values.rows(), values.cols(), row_major.data(),
            row_major.size() * sizeof(double));
}

void ArchiveWriter::add_vector(const std::string& name, const Vector<double>& values) {
  add_chunk(name, "f64", values.size(), 1, values.data(),
            static_cast<std::size_t>(values.size()) * sizeof(double));
}

void ArchiveWriter::add_i64(const std::string& name, const std::vector<std::int64_t>& values) {
  add_chunk(name, "i64", static_cast<Index>(values.size()), 1, values.data(),
            values.size() * sizeof(std::int64_t));
}

void ArchiveWriter::save(const std::filesystem::path& path) {
  ContentHash payload_hash;
  payload_hash.update(payload_.data(), payload_.size());
  manifest_["payload"]["bytes"] = payload_.size();
  manifest_["payload"]["hash"] = payload_hash.hex();

  const std::string manifest_text = manifest_.dump(2);
  const std::uint64_t manifest_size = manifest_text.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out.write(kArchiveMagic, sizeof(kArchiveMagic));
  out.write(reinterpret_cast<const char*>(&manifest_size), sizeof(manifest_size));
  out.write(manifest_text.data(), static_cast<std::streamsize>(manifest_text.size()));
  out.write(payload_.data(), static_cast<std::streamsize>(payload_.size()));
  if (!out) throw data_error("failed while writing '" + path.string() + "'");
}

ArchiveReader::ArchiveReader(const std::filesystem::path& path) : path_(path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < sizeof(kArchiveMagic) + sizeof(std::uint64_t)) {
    fail_archive(path, "file too short to be an archive");
  }
  if (std::memcmp(bytes.data(), kArchiveMagic, sizeof(kArchiveMagic)) != 0) {
    fail_archive(path, "bad magic, not an archive produced by this tool");
  }
  std::uint64_t manifest_size = 0;
  std::memcpy(&manifest_size, bytes.data() + sizeof(kArchiveMagic), sizeof(manifest_size));
  const std::size_t header = sizeof(kArchiveMagic) + sizeof(std::uint64_t);
  if (bytes.size() < header + manifest_size) fail_archive(path, "truncated manifest");

  try {
    manifest_ = json::parse(bytes.substr(header, manifest_size));
  } catch (const json::exception& e) {
    fail_archive(path, std::string("manifest is not valid JSON (") + e.what() + ")");
  }
  payload_ = bytes.substr(header + manifest_size);

  const auto& payload_meta = manifest_.at("payload");
  if (payload_meta.at("bytes").get<std::size_t>() != payload_.size()) {
    fail_archive(path, "payload size mismatch");
  }
  ContentHash payload_hash;
  payload_hash.update(payload_.data(), payload_.size());
  if (payload_meta.at("hash").get<std::string>() != payload_hash.hex()) {
    fail_archive(path, "payload failed content validation");
  }
  for (const auto& c : payload_meta.at("chunks")) {
    Chunk chunk;
    chunk.kind = c.at("kind").get<std::string>();
    chunk.rows = c.at("rows").get<Index>();
    chunk.cols = c.at("cols").get<Index>();
    chunk.offset = c.at("offset").get<std::size_t>();
    chunk.bytes = c.at("bytes").get<std::size_t>();
    if (chunk.offset + chunk.bytes > payload_.size()) {
      fail_archive(path, "chunk '" + c.at("name").get<std::string>() + "' out of bounds");
    }
    ContentHash hash;
    hash.update(payload_.data() + chunk.offset, chunk.bytes);
    if (hash.hex() != c.at("hash").get<std::string>()) {
      fail_archive(path, "chunk '" + c.at("name").get<std::string>() + "' failed content validation");
    }
    chunks_[c.at("name").get<std::string>()] = std::move(chunk);
  }
}

std::string ArchiveReader::kind() const { return manifest_.at("kind").get<std::string>(); }

bool ArchiveReader::has_chunk(const std::string& name) const { return chunks_.count(name) > 0; }

const ArchiveReader::Chunk& ArchiveReader::chunk(const std::string& name,
                                                 const char* expected_kind) const {
  const auto it = chunks_.find(name);
  if (it == chunks_.end()) fail_archive(path_, "missing chunk '" + name + "'");
  if (it->second.kind != expected_kind) {
    fail_archive(path_, "chunk '" + name + "' has kind " + it->second.kind + ", expected " +
                            expected_kind);
  }
  return it->second;
}

Matrix<double> ArchiveReader::read_matrix(const std::string& name) const {
  const Chunk& c = chunk(name, "f64");
  if (c.bytes != static_cast<std::size_t>(c.rows) * static_cast<std::size_t>(c.cols) * sizeof(double)) {
    fail_archive(path_, "chunk '" + name + "' size does not match its shape");
  }
  Matrix<double> values(c.rows, c.cols);
  const char* base = payload_.data() + c.offset;
  for (Index i = 0; i < c.rows; ++i) {
    for (Index j = 0; j < c.cols; ++j) {
      double v;
      std::memcpy(&v, base + (static_cast<std::size_t>(i) * static_cast<std::size_t>(c.cols) +
                              static_cast<std::size_t>(j)) *
                                 sizeof(double),
                  sizeof(v));
      values(i, j) = v;
    }
  }
  return values;
}

Vector<double> ArchiveReader::read_vector(const std::string& name) const {
  const Chunk& c = chunk(name, "f64");
  if (c.cols != 1) fail_archive(path_, "chunk '" + name + "' is not a vector");
  Vector<double> values(c.rows);
  if (c.bytes > 0) std::memcpy(values.data(), payload_.data() + c.offset, c.bytes);
  return values;
}

std::vector<std::int64_t> ArchiveReader::read_i64(const std::string& name) const {
  const Chunk& c = chunk(name, "i64");
  std::vector<std::int64_t> values(static_cast<std::size_t>(c.rows));
  if (c.bytes > 0) std::memcpy(values.data(), payload_.data() + c.offset, c.bytes);
  return values;
}

std::string file_content_hash(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ContentHash hash;
  hash.update(bytes.data(), bytes.size());
  return hash.hex();
}

// ---------------------------------------------------------------------------
// concept graph archives

namespace {

json lexicon_json(const NounLexicon& lexicon) {
  json out;
  out["nouns"] = lexicon.nouns();
  json totals = json::array();
  for (Index i = 0; i < lexicon.size(); ++i) totals.push_back(lexicon.total_count(i));
  out["totals"] = std::move(totals);
  return out;
}

NounLexicon lexicon_from_json(const json& j) {
  auto nouns = j.at("nouns").get<std::vector<std::string>>();
  auto totals = j.at("totals").get<std::vector<std::int64_t>>();
  if (nouns.size() != totals.size()) throw data_error("lexicon nouns and totals differ in length");
  return NounLexicon(std::move(nouns), std::move(totals));
}

// Re-derive the parts of a level that are functions of H and lambda, so the
// archive stores only the canonical state.
HierarchyLevel rebuild_level(Factorization<double> factor) {
  HierarchyLevel level;
  const Matrix<double> b = adjacency(factor);
  level.hard_parent = hard_assignments(b);
  level.transition = b;
  for (Index i = 0; i < b.rows(); ++i) {
    const double d = b.row(i).sum();
    if (d > 0.0) level.transition.row(i) /= d;
    else level.transition.row(i).setZero();
  }
  level.factor = std::move(factor);
  return level;
}

}  // namespace

void save_graph(const ConceptGraph& graph, const std::filesystem::path& path,
                const json& extra) {
  ArchiveWriter writer("concept-graph");
  json& m = writer.manifest();
  m["provenance"] = extra;
  m["lexicon"] = lexicon_json(graph.lexicon);
  m["flagged"] = graph.flagged;
  m["options"] = {{"m1", graph.options.m1},
                  {"max_iterations", graph.options.max_iterations},
                  {"tol", graph.options.tol},
                  {"tol_streak", graph.options.tol_streak},
                  {"seed", graph.options.seed}};

  json levels = json::array();
  for (std::size_t l = 0; l < graph.levels.size(); ++l) {
    const HierarchyLevel& level = graph.levels[l];
    levels.push_back({{"clusters", level.factor.clusters()},
                      {"iterations", level.factor.iterations},
                      {"cost", level.factor.cost},
                      {"converged", level.factor.converged},
                      {"non_empty", level.non_empty}});
    const std::string prefix = "level" + std::to_string(l + 1) + "/";
    writer.add_matrix(prefix + "membership", level.factor.membership);
    writer.add_vector(prefix + "mass", level.factor.cluster_mass);
  }
  m["levels"] = std::move(levels);

  json explicit_levels = json::array();
  const ExplicitGraph view = explicit_view(graph);
  for (const auto& level : view.levels) {
    json clusters = json::array();
    for (const auto& cluster : level.clusters) {
      clusters.push_back({{"cluster", cluster.cluster_id}, {"members", cluster.members}});
    }
    explicit_levels.push_back(std::move(clusters));
  }
  m["explicit"] = std::move(explicit_levels);
  writer.save(path);
}

ConceptGraph load_graph(const std::filesystem::path& path) {
  ArchiveReader reader(path);
  if (reader.kind() != "concept-graph") {
    throw data_error("archive '" + path.string() + "' holds a " + reader.kind() +
                     ", expected a concept-graph; pass the artifact written by `train`");
  }
  const json& m = reader.manifest();
  ConceptGraph graph;
  graph.lexicon = lexicon_from_json(m.at("lexicon"));
  graph.flagged = m.at("flagged").get<std::vector<Index>>();
  const json& options = m.at("options");
  graph.options.m1 = options.at("m1").get<Index>();
  graph.options.max_iterations = options.at("max_iterations").get<int>();
  graph.options.tol = options.at("tol").get<double>();
  graph.options.tol_streak = options.at("tol_streak").get<int>();
  graph.options.seed = options.at("seed").get<std::uint64_t>();

  const json& levels = m.at("levels");
  std::vector<Index> chain;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::string prefix = "level" + std::to_string(l + 1) + "/";
    Factorization<double> factor;
    factor.membership = reader.read_matrix(prefix + "membership");
    factor.cluster_mass = reader.read_vector(prefix + "mass");
    factor.iterations = levels[l].at("iterations").get<int>();
    factor.cost = levels[l].at("cost").get<double>();
    factor.converged = levels[l].at("converged").get<bool>();
    HierarchyLevel level = rebuild_level(std::move(factor));
    if (l == 0) {
      chain = level.hard_parent;
    } else {
      for (auto& c : chain) {
        if (c != kUnassigned) c = level.hard_parent[static_cast<std::size_t>(c)];
      }
    }
    std::vector<char> seen(static_cast<std::size_t>(level.factor.clusters()), 0);
    for (Index c : chain) {
      if (c != kUnassigned && !seen[static_cast<std::size_t>(c)]) {
        seen[static_cast<std::size_t>(c)] = 1;
        ++level.non_empty;
      }
    }
    graph.levels.push_back(std::move(level));
  }
  return graph;
}

// ---------------------------------------------------------------------------
// feature matrix artifacts (pure JSON)

void save_features(const FeatureMatrix& features, const std::filesystem::path& path,
                   const json& extra) {
  json out;
  out["format"] = "metaphor-features-1";
  out["provenance"] = extra;
  out["lexicon"] = lexicon_json(features.lexicon);
  out["flagged"] = features.flagged;
  json columns = json::array();
  for (const auto& key : features.columns) {
    columns.push_back({std::string(to_string(key.relation)), key.verb});
  }
  out["columns"] = std::move(columns);
  json rows = json::array();
  for (Index i = 0; i < features.rows(); ++i) {
    json row = json::array();
    for (SparseRowMatrix::InnerIterator it(features.values, i); it; ++it) {
      row.push_back({it.col(), it.value()});
    }
    rows.push_back(std::move(row));
  }
  out["rows"] = std::move(rows);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw data_error("cannot write '" + path.string() + "'");
  file << out.dump(2) << "\n";
  if (!file) throw data_error("failed while writing '" + path.string() + "'");
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw data_error("features artifact '" + path.string() + "' not found; run `ingest` first");
  }
  json in;
  try {
    std::ifstream file(path, std::ios::binary);
    in = json::parse(file);
  } catch (const json::exception& e) {
    throw data_error("features artifact '" + path.string() + "' is not valid JSON (" + e.what() +
                     "); re-run `ingest`");
  }
  if (in.value("format", "") != "metaphor-features-1") {
    throw data_error("'" + path.string() + "' is not a features artifact; pass the output of `ingest`");
  }

  FeatureMatrix features;
  features.lexicon = lexicon_from_json(in.at("lexicon"));
  features.flagged = in.at("flagged").get<std::vector<Index>>();
  for (const auto& column : in.at("columns")) {
    const auto relation = parse_relation(column.at(0).get<std::string>());
    if (!relation) throw data_error("features artifact has an unknown relation tag");
    features.columns.push_back({*relation, column.at(1).get<std::string>()});
  }
  const json& rows = in.at("rows");
  if (static_cast<Index>(rows.size()) != features.lexicon.size()) {
    throw data_error("features artifact row count does not match its lexicon");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& cell : rows[i]) {
      triplets.emplace_back(static_cast<int>(i), cell.at(0).get<int>(),
                            cell.at(1).get<double>());
    }
  }
  features.values.resize(features.lexicon.size(), static_cast<Index>(features.columns.size()));
  features.values.setFromTriplets(triplets.begin(), triplets.end());
  features.values.makeCompressed();
  return features;
}

// ---------------------------------------------------------------------------
// baseline graph archives

namespace {

void add_sparse(ArchiveWriter& writer, const std::string& prefix, const SparseRowMatrix& m) {
  std::vector<std::int64_t> ptr;
  std::vector<std::int64_t> idx;
  std::vector<double> val;
  ptr.reserve(static_cast<std::size_t>(m.rows()) + 1);
  ptr.push_back(0);
  for (Index i = 0; i < m.rows(); ++i) {
    for (SparseRowMatrix::InnerIterator it(m, i); it; ++it) {
      idx.push_back(it.col());
      val.push_back(it.value());
    }
    ptr.push_back(static_cast<std::int64_t>(idx.size()));
  }
  writer.add_i64(prefix + "ptr", ptr);
  writer.add_i64(prefix + "idx", idx);
  Vector<double> values(static_cast<Index>(val.size()));
  for (std::size_t k = 0; k < val.size(); ++k) values(static_cast<Index>(k)) = val[k];
  writer.add_vector(prefix + "val", values);
  writer.manifest()["sparse"][prefix] = {{"rows", m.rows()}, {"cols", m.cols()}};
}

SparseRowMatrix read_sparse(const ArchiveReader& reader, const std::string& prefix) {
  const auto& shape = reader.manifest().at("sparse").at(prefix);
  const auto ptr = reader.read_i64(prefix + "ptr");
  const auto idx = reader.read_i64(prefix + "idx");
  const Vector<double> val = reader.read_vector(prefix + "val");
  SparseRowMatrix m(shape.at("rows").get<Index>(), shape.at("cols").get<Index>());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(val.size()));
  for (std::size_t row = 0; row + 1 < ptr.size(); ++row) {
    for (std::int64_t k = ptr[row]; k < ptr[row + 1]; ++k) {
      triplets.emplace_back(static_cast<int>(row), static_cast<int>(idx[static_cast<std::size_t>(k)]),
                            val(static_cast<Index>(k)));
    }
  }
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

void save_baseline(const BaselineGraph& graph, const std::filesystem::path& path,
                   const json& extra) {
  ArchiveWriter writer("baseline-graph");
  json& m = writer.manifest();
  m["provenance"] = extra;
  m["lexicon"] = lexicon_json(graph.features.lexicon);
  m["flagged"] = graph.features.flagged;
  json columns = json::array();
  for (const auto& key : graph.features.columns) {
    columns.push_back({std::string(to_string(key.relation)), key.verb});
  }
  m["columns"] = std::move(columns);
  add_sparse(writer, "features/", graph.features.values);

  json levels = json::array();
  for (std::size_t l = 0; l < graph.levels.size(); ++l) {
    const BaselineLevel& level = graph.levels[l];
    json clusters = json::array();
    for (const auto& members : level.clusters) clusters.push_back(members);
    levels.push_back({{"clusters", std::move(clusters)}});
    const std::string prefix = "level" + std::to_string(l + 1) + "/";
    add_sparse(writer, prefix + "centroids/", level.centroids);
    if (level.up.size() > 0) writer.add_matrix(prefix + "up", level.up);
  }
  m["levels"] = std::move(levels);
  writer.save(path);
}

BaselineGraph load_baseline(const std::filesystem::path& path) {
  ArchiveReader reader(path);
  if (reader.kind() != "baseline-graph") {
    throw data_error("archive '" + path.string() + "' holds a " + reader.kind() +
                     ", expected a baseline-graph; pass the artifact written by `baseline`");
  }
  const json& m = reader.manifest();
  BaselineGraph graph;
  graph.features.lexicon = lexicon_from_json(m.at("lexicon"));
  graph.features.flagged = m.at("flagged").get<std::vector<Index>>();
  for (const auto& column : m.at("columns")) {
    const auto relation = parse_relation(column.at(0).get<std::string>());
    if (!relation) throw data_error("baseline archive has an unknown relation tag");
    graph.features.columns.push_back({*relation, column.at(1).get<std::string>()});
  }
  graph.features.values = read_sparse(reader, "features/");

  const json& levels = m.at("levels");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    BaselineLevel level;
    level.clusters = levels[l].at("clusters").get<std::vector<std::vector<Index>>>();
    const std::string prefix = "level" + std::to_string(l + 1) + "/";
    level.centroids = read_sparse(reader, prefix + "centroids/");
    if (reader.has_chunk(prefix + "up")) level.up = reader.read_matrix(prefix + "up");
    graph.levels.push_back(std::move(level));
  }
  return graph;
}

}  // namespace metaphor
