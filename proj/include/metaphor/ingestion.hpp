#pragma once

#include <Eigen/SparseCore>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "metaphor/common.hpp"

namespace metaphor {

// Grammatical relation a verb-noun co-occurrence was observed in. The three
// relations form a closed set; unknown tags in input are rejected so that
// extraction mistakes surface instead of silently vanishing.
enum class Relation : std::uint8_t {
  Subject = 0,
  DirectObject = 1,
  IndirectObject = 2,
};

std::string_view to_string(Relation relation);
std::optional<Relation> parse_relation(std::string_view tag);  // case-insensitive

struct TripleRecord {
  std::string verb;
  Relation relation = Relation::Subject;
  std::string noun;
  std::int64_t count = 0;

  friend auto operator<=>(const TripleRecord&, const TripleRecord&) = default;
};

// Reads `verb<TAB>relation<TAB>noun<TAB>count` lines. Blank lines and lines
// whose first non-space character is '#' are skipped. Duplicate
// (verb, relation, noun) keys are aggregated by summing counts; the result is
// sorted by (verb, relation, noun).
std::vector<TripleRecord> parse_triples(std::istream& in);

// Inverse of parse_triples on aggregated record sets.
void write_triples(std::ostream& out, const std::vector<TripleRecord>& records);

class NounLexicon {
 public:
  NounLexicon() = default;
  NounLexicon(std::vector<std::string> nouns, std::vector<std::int64_t> totals);

  Index size() const { return static_cast<Index>(nouns_.size()); }
  const std::vector<std::string>& nouns() const { return nouns_; }
  const std::string& noun(Index i) const { return nouns_[static_cast<std::size_t>(i)]; }
  std::int64_t total_count(Index i) const { return totals_[static_cast<std::size_t>(i)]; }
  std::optional<Index> index_of(std::string_view noun) const;

 private:
  std::vector<std::string> nouns_;  // count descending, lemma ascending on ties
  std::vector<std::int64_t> totals_;
  std::unordered_map<std::string, Index> index_;
};

// The `size` nouns with the highest summed co-occurrence counts.
NounLexicon select_vocabulary(const std::vector<TripleRecord>& records, std::size_t size);

struct FeatureKey {
  Relation relation = Relation::Subject;
  std::string verb;

  friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
};

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Per-noun relative-frequency vectors over (relation, verb) feature keys.
// Rows of nouns with no surviving feature are all-zero and flagged.
struct FeatureMatrix {
  SparseRowMatrix values;           // rows sum to 1, or to 0 when flagged
  std::vector<FeatureKey> columns;  // sorted by (relation, verb)
  NounLexicon lexicon;
  std::vector<Index> flagged;       // ascending row indices

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  bool is_flagged(Index row) const;
};

FeatureMatrix build_feature_matrix(const std::vector<TripleRecord>& records,
                                   NounLexicon lexicon,
                                   std::int64_t min_feature_count = 1);

}  // namespace metaphor
