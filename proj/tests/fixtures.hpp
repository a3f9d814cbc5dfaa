#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "metaphor/ingestion.hpp"
#include "metaphor/similarity.hpp"

namespace fixtures {

inline std::string group_noun(int group, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "g%dn%02d", group, i);
  return buf;
}

inline std::string group_verb(int group, int k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "act%d_%02d", group, k);
  return buf;
}

inline metaphor::Relation group_relation(int k) {
  return k % 2 ? metaphor::Relation::DirectObject : metaphor::Relation::Subject;
}

inline constexpr int kPlantedGroups = 5;
inline constexpr int kPlantedNounsPerGroup = 12;
inline constexpr int kPlantedVerbsPerGroup = 20;

// Five concept groups of twelve nouns, each group with its own twenty verbs.
// Group 0 nouns additionally spend ~45% of their feature mass on group 1's
// verbs, so group 1 is the planted metaphorical target for group 0 sources.
inline std::vector<metaphor::TripleRecord> planted_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto draw = [&rng]() -> std::int64_t {
    return 5 + static_cast<std::int64_t>(metaphor::uniform01(rng) * 56.0);
  };

  std::vector<metaphor::TripleRecord> records;
  for (int g = 0; g < kPlantedGroups; ++g) {
    for (int i = 0; i < kPlantedNounsPerGroup; ++i) {
      const std::string noun = group_noun(g, i);
      std::vector<std::int64_t> own(kPlantedVerbsPerGroup);
      std::int64_t own_sum = 0;
      for (int k = 0; k < kPlantedVerbsPerGroup; ++k) {
        own[k] = draw();
        own_sum += own[k];
      }
      for (int k = 0; k < kPlantedVerbsPerGroup; ++k) {
        records.push_back({group_verb(g, k), group_relation(k), noun, own[k]});
      }
      if (g == 0) {
        std::vector<std::int64_t> target(kPlantedVerbsPerGroup);
        std::int64_t target_sum = 0;
        for (int k = 0; k < kPlantedVerbsPerGroup; ++k) {
          target[k] = draw();
          target_sum += target[k];
        }
        const double scale =
            (0.45 / 0.55) * static_cast<double>(own_sum) / static_cast<double>(target_sum);
        for (int k = 0; k < kPlantedVerbsPerGroup; ++k) {
          const auto scaled = static_cast<std::int64_t>(
              std::llround(static_cast<double>(target[k]) * scale));
          records.push_back({group_verb(1, k), group_relation(k), noun, std::max<std::int64_t>(1, scaled)});
        }
      }
    }
  }
  return records;
}

inline std::string planted_source() { return group_noun(0, 0); }

// How many of the mapping's members are planted group-1 nouns.
inline int target_overlap(const std::vector<std::string>& members) {
  int hits = 0;
  for (int i = 0; i < kPlantedNounsPerGroup; ++i) {
    const std::string want = group_noun(1, i);
    for (const auto& member : members) {
      if (member == want) {
        ++hits;
        break;
      }
    }
  }
  return hits;
}

// Two tight four-noun blocks plus one weak shared verb so every pair has
// nonzero similarity. Small enough for exhaustive checks.
inline std::vector<metaphor::TripleRecord> toy_triples() {
  using metaphor::Relation;
  std::vector<metaphor::TripleRecord> records;
  const char* herd[] = {"mare", "foal", "stallion", "pony"};
  const char* kit[] = {"chisel", "rasp", "awl", "plane"};
  for (int i = 0; i < 4; ++i) {
    records.push_back({"graze", Relation::Subject, herd[i], 6 + i});
    records.push_back({"groom", Relation::DirectObject, herd[i], 9 - i});
    records.push_back({"exist", Relation::Subject, herd[i], 1});
    records.push_back({"sharpen", Relation::DirectObject, kit[i], 5 + 2 * i});
    records.push_back({"drop", Relation::DirectObject, kit[i], 4 + i});
    records.push_back({"exist", Relation::Subject, kit[i], 1});
  }
  return records;
}

inline metaphor::FeatureMatrix toy_features() {
  const auto records = toy_triples();
  auto lexicon = metaphor::select_vocabulary(records, 100);
  return metaphor::build_feature_matrix(records, std::move(lexicon), 1);
}

inline metaphor::SimilarityMatrix toy_similarity() {
  return metaphor::similarity_matrix(toy_features());
}

inline std::vector<metaphor::TripleRecord> parse_text(const std::string& text) {
  std::istringstream in(text);
  return metaphor::parse_triples(in);
}

}  // namespace fixtures
