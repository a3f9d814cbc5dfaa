#include "metaphor/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace metaphor {

std::string cluster_content_hash(const std::vector<std::string>& members) {
  ContentHash hash;
  for (const auto& member : members) {
    hash.update(member);
    hash.update("\n");
  }
  return hash.hex();
}

namespace {

bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '#';
  }
  return true;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
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

JudgmentFile parse_judgments(std::istream& in) {
  JudgmentFile out;
  std::string line;
  std::size_t line_no = 0;
  bool have_annotator = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank_or_comment(line)) continue;
    const auto fields = split_tabs(line);
    if (!have_annotator) {
      if (fields.size() != 2 || fields[0] != "annotator" || fields[1].empty()) {
        fail_line(line_no, "expected 'annotator<TAB>id' before any judgments");
      }
      out.annotator = fields[1];
      have_annotator = true;
      continue;
    }
    if (fields.size() != 3) {
      fail_line(line_no, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) fail_line(line_no, "empty source");
    if (fields[1].empty()) fail_line(line_no, "empty cluster hash");
    bool valid = false;
    if (fields[2] == "valid") valid = true;
    else if (fields[2] == "invalid") valid = false;
    else fail_line(line_no, "verdict must be 'valid' or 'invalid', got '" + fields[2] + "'");
    out.entries.push_back({fields[0], fields[1], valid});
  }
  if (!have_annotator) throw data_error("judgment file has no 'annotator' header line");
  return out;
}

std::size_t GoldStandard::size() const {
  std::size_t total = 0;
  for (const auto& [source, targets] : sources) total += targets.size();
  return total;
}

GoldStandard parse_gold(std::istream& in) {
  GoldStandard out;
  std::map<std::string, std::size_t> source_slot;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank_or_comment(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2 && fields.size() != 3) {
      fail_line(line_no, "expected 2 or 3 tab-separated fields, got " +
                             std::to_string(fields.size()));
    }
    if (fields[0].empty()) fail_line(line_no, "empty source");
    if (fields[1].empty()) fail_line(line_no, "empty target label");

    GoldTarget target;
    target.label = fields[1];
    if (fields.size() == 3) {
      std::size_t start = 0;
      const std::string& lex = fields[2];
      while (start <= lex.size()) {
        const std::size_t comma = lex.find(',', start);
        const std::string token =
            lex.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (token.empty()) fail_line(line_no, "empty lexicalization");
        target.lexicalizations.push_back(token);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else {
      target.lexicalizations.push_back(target.label);
    }

    auto [it, inserted] = source_slot.try_emplace(fields[0], out.sources.size());
    if (inserted) out.sources.push_back({fields[0], {}});
    auto& targets = out.sources[it->second].second;
    for (const auto& existing : targets) {
      if (existing.label == target.label) {
        fail_line(line_no, "duplicate gold target '" + target.label + "' for source '" +
                               fields[0] + "'");
      }
    }
    targets.push_back(std::move(target));
  }
  return out;
}

PrecisionReport precision(const std::vector<MetaphorMapping>& mappings,
                          const std::vector<JudgmentFile>& judgments) {
  if (mappings.empty()) throw data_error("precision is undefined over zero mappings");
  if (judgments.empty()) throw data_error("no judgment files given");

  PrecisionReport report;
  double sum = 0.0;
  for (const auto& file : judgments) {
    std::map<std::pair<std::string, std::string>, bool> verdicts;
    for (const auto& entry : file.entries) {
      verdicts[{entry.source, entry.cluster_hash}] = entry.valid;
    }
    std::size_t valid = 0;
    for (const auto& mapping : mappings) {
      const auto key = std::make_pair(mapping.source, cluster_content_hash(mapping.members));
      const auto it = verdicts.find(key);
      if (it == verdicts.end()) {
        throw data_error("mapping '" + mapping.source + "' -> cluster " + key.second +
                         " has no judgment from annotator '" + file.annotator + "'");
      }
      if (it->second) ++valid;
    }
    const double p = static_cast<double>(valid) / static_cast<double>(mappings.size());
    report.per_annotator.emplace_back(file.annotator, p);
    sum += p;
  }
  report.average = sum / static_cast<double>(judgments.size());
  return report;
}

RecallReport recall(const std::vector<MetaphorMapping>& mappings, const GoldStandard& gold) {
  RecallReport report;
  report.gold_size = gold.size();
  if (report.gold_size == 0) throw data_error("gold standard is empty");

  std::map<std::string, std::set<std::string>> emitted;  // source -> union of member nouns
  for (const auto& mapping : mappings) {
    emitted[mapping.source].insert(mapping.members.begin(), mapping.members.end());
  }

  for (const auto& [source, targets] : gold.sources) {
    const auto it = emitted.find(source);
    for (const auto& target : targets) {
      bool hit = false;
      if (it != emitted.end()) {
        for (const auto& lex : target.lexicalizations) {
          if (it->second.count(lex)) {
            hit = true;
            break;
          }
        }
      }
      if (hit) ++report.hits;
      report.outcomes.push_back({source, target.label, hit});
    }
  }
  report.recall = static_cast<double>(report.hits) / static_cast<double>(report.gold_size);
  return report;
}

double cohen_kappa(const std::vector<bool>& first, const std::vector<bool>& second) {
  if (first.size() != second.size()) {
    throw data_error("verdict vectors differ in length: " + std::to_string(first.size()) +
                     " vs " + std::to_string(second.size()));
  }
  if (first.empty()) throw data_error("verdict vectors are empty");

  double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] && second[i]) ++n11;
    else if (!first[i] && !second[i]) ++n00;
    else if (first[i]) ++n10;
    else ++n01;
  }
  const double n = static_cast<double>(first.size());
  const double observed = (n11 + n00) / n;
  const double expected =
      ((n11 + n10) * (n11 + n01) + (n00 + n01) * (n00 + n10)) / (n * n);
  if (expected == 1.0) return 1.0;
  return (observed - expected) / (1.0 - expected);
}

std::string render_results_table(const std::vector<SystemScore>& rows) {
  std::size_t width = 6;  // "system"
  for (const auto& row : rows) width = std::max(width, row.system.size());

  auto cell = [](const std::optional<double>& value) {
    if (!value) return std::string("   -");
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", *value);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "system" << std::string(width - 6, ' ') << "  P     R\n";
  for (const auto& row : rows) {
    out << row.system << std::string(width - row.system.size(), ' ') << "  " << cell(row.precision)
        << "  " << cell(row.recall) << "\n";
  }
  return out.str();
}

}  // namespace metaphor
