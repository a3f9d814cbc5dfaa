#include "metaphor/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>

namespace metaphor {

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::Subject: return "subj";
    case Relation::DirectObject: return "dobj";
    case Relation::IndirectObject: return "iobj";
  }
  return "?";
}

std::optional<Relation> parse_relation(std::string_view tag) {
  std::string lower(tag);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "subj") return Relation::Subject;
  if (lower == "dobj") return Relation::DirectObject;
  if (lower == "iobj") return Relation::IndirectObject;
  return std::nullopt;
}

namespace {

bool blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '#';
  }
  return true;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw data_error("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::vector<TripleRecord> parse_triples(std::istream& in) {
  std::map<std::tuple<std::string, Relation, std::string>, std::int64_t> aggregated;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank_or_comment(line)) continue;

    const auto fields = split_tabs(line);
    if (fields.size() != 4) {
      fail_line(line_no, "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    }
    const std::string_view verb = fields[0];
    const std::string_view relation_tag = fields[1];
    const std::string_view noun = fields[2];
    const std::string_view count_text = fields[3];
    if (verb.empty()) fail_line(line_no, "empty verb");
    if (noun.empty()) fail_line(line_no, "empty noun");

    const auto relation = parse_relation(relation_tag);
    if (!relation) fail_line(line_no, "unknown relation '" + std::string(relation_tag) + "'");

    std::int64_t count = 0;
    const auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size()) {
      fail_line(line_no, "count '" + std::string(count_text) + "' is not an integer");
    }
    if (count <= 0) fail_line(line_no, "count must be positive, got " + std::to_string(count));

    aggregated[{std::string(verb), *relation, std::string(noun)}] += count;
  }

  std::vector<TripleRecord> records;
  records.reserve(aggregated.size());
  for (const auto& [key, count] : aggregated) {
    records.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), count});
  }
  return records;
}

void write_triples(std::ostream& out, const std::vector<TripleRecord>& records) {
  for (const auto& r : records) {
    out << r.verb << '\t' << to_string(r.relation) << '\t' << r.noun << '\t' << r.count << '\n';
  }
}

NounLexicon::NounLexicon(std::vector<std::string> nouns, std::vector<std::int64_t> totals)
    : nouns_(std::move(nouns)), totals_(std::move(totals)) {
  index_.reserve(nouns_.size());
  for (std::size_t i = 0; i < nouns_.size(); ++i) index_[nouns_[i]] = static_cast<Index>(i);
}

std::optional<Index> NounLexicon::index_of(std::string_view noun) const {
  const auto it = index_.find(std::string(noun));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NounLexicon select_vocabulary(const std::vector<TripleRecord>& records, std::size_t size) {
  if (size == 0) throw data_error("vocabulary size must be positive");
  std::map<std::string, std::int64_t> totals;
  for (const auto& r : records) totals[r.noun] += r.count;

  std::vector<std::pair<std::string, std::int64_t>> ranked(totals.begin(), totals.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > size) ranked.resize(size);

  std::vector<std::string> nouns;
  std::vector<std::int64_t> counts;
  nouns.reserve(ranked.size());
  counts.reserve(ranked.size());
  for (auto& [noun, count] : ranked) {
    nouns.push_back(std::move(noun));
    counts.push_back(count);
  }
  return NounLexicon(std::move(nouns), std::move(counts));
}

bool FeatureMatrix::is_flagged(Index row) const {
  return std::binary_search(flagged.begin(), flagged.end(), row);
}

FeatureMatrix build_feature_matrix(const std::vector<TripleRecord>& records, NounLexicon lexicon,
                                   std::int64_t min_feature_count) {
  if (min_feature_count < 0) throw data_error("min feature count must be nonnegative");

  // Aggregate per (noun, relation, verb) cell, then threshold each cell on its
  // raw count. A feature key becomes a column if any cell survives.
  std::map<std::pair<Index, FeatureKey>, std::int64_t> cells;
  for (const auto& r : records) {
    const auto row = lexicon.index_of(r.noun);
    if (!row) continue;
    cells[{*row, FeatureKey{r.relation, r.verb}}] += r.count;
  }

  std::map<FeatureKey, Index> column_of;
  for (const auto& [key, count] : cells) {
    if (count < min_feature_count) continue;
    column_of.emplace(key.second, 0);
  }
  std::vector<FeatureKey> columns;
  columns.reserve(column_of.size());
  for (auto& [key, index] : column_of) {
    index = static_cast<Index>(columns.size());
    columns.push_back(key);
  }

  const Index n = lexicon.size();
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> row_sums(static_cast<std::size_t>(n), 0.0);
  for (const auto& [key, count] : cells) {
    if (count < min_feature_count) continue;
    const Index row = key.first;
    const Index col = column_of.at(key.second);
    triplets.emplace_back(static_cast<int>(row), static_cast<int>(col),
                          static_cast<double>(count));
    row_sums[static_cast<std::size_t>(row)] += static_cast<double>(count);
  }

  FeatureMatrix out;
  out.values.resize(n, static_cast<Index>(columns.size()));
  out.values.setFromTriplets(triplets.begin(), triplets.end());
  out.columns = std::move(columns);
  for (Index i = 0; i < n; ++i) {
    const double sum = row_sums[static_cast<std::size_t>(i)];
    if (sum > 0.0) {
      for (SparseRowMatrix::InnerIterator it(out.values, i); it; ++it) it.valueRef() /= sum;
    } else {
      out.flagged.push_back(i);
    }
  }
  out.values.makeCompressed();
  out.lexicon = std::move(lexicon);
  return out;
}

}  // namespace metaphor
