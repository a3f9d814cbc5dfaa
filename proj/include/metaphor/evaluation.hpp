#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metaphor/association.hpp"

namespace metaphor {

// Hash of a target cluster's member list; judgments are keyed on it so a
// re-clustered graph invalidates stale judgment files loudly.
std::string cluster_content_hash(const std::vector<std::string>& members);

struct Judgment {
  std::string source;
  std::string cluster_hash;
  bool valid = false;
};

struct JudgmentFile {
  std::string annotator;
  std::vector<Judgment> entries;
};

// Line format: `annotator<TAB>id` once, then `source<TAB>cluster-hash<TAB>valid|invalid`.
JudgmentFile parse_judgments(std::istream& in);

struct GoldTarget {
  std::string label;
  std::vector<std::string> lexicalizations;  // nouns that count as expressing the concept
};

struct GoldStandard {
  // Unique sources in file order, each with its expected target concepts.
  std::vector<std::pair<std::string, std::vector<GoldTarget>>> sources;

  std::size_t size() const;  // total (source, target) pairs
};

// Line format: `source<TAB>label` or `source<TAB>label<TAB>lex1,lex2,...`;
// without the third field the label is its own lexicalization.
GoldStandard parse_gold(std::istream& in);

struct PrecisionReport {
  std::vector<std::pair<std::string, double>> per_annotator;
  double average = 0.0;
};

// Every mapping must be judged by every annotator; fails naming any gap.
PrecisionReport precision(const std::vector<MetaphorMapping>& mappings,
                          const std::vector<JudgmentFile>& judgments);

struct GoldOutcome {
  std::string source;
  std::string label;
  bool hit = false;
};

struct RecallReport {
  double recall = 0.0;
  std::size_t hits = 0;
  std::size_t gold_size = 0;
  std::vector<GoldOutcome> outcomes;  // gold order
};

// A gold (source, target) counts as hit when any mapping for that source has
// a member exactly matching one of the target's lexicalizations.
RecallReport recall(const std::vector<MetaphorMapping>& mappings, const GoldStandard& gold);

// Agreement between two aligned binary verdict vectors. Defined as 1 when
// both annotators are constant and equal (chance agreement is total).
double cohen_kappa(const std::vector<bool>& first, const std::vector<bool>& second);

struct SystemScore {
  std::string system;
  std::optional<double> precision;
  std::optional<double> recall;
};

// Fixed-width text table of systems against P and R, two decimals.
std::string render_results_table(const std::vector<SystemScore>& rows);

}  // namespace metaphor
