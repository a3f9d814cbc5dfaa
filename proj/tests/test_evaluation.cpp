#include <doctest.h>

#include <sstream>

#include "metaphor/evaluation.hpp"

using namespace metaphor;

namespace {

MetaphorMapping make_mapping(std::string source, std::vector<std::string> members,
                             Index rank = 1) {
  MetaphorMapping m;
  m.source = std::move(source);
  m.level = 1;
  m.rank = rank;
  m.cluster_id = rank;
  m.score = 0.5;
  m.members = std::move(members);
  return m;
}

std::string judged_line(const MetaphorMapping& m, const char* verdict) {
  return m.source + "\t" + cluster_content_hash(m.members) + "\t" + verdict + "\n";
}

}  // namespace

TEST_CASE("cluster_content_hash is deterministic and content-sensitive") {
  const std::vector<std::string> a = {"anger", "rage"};
  const std::vector<std::string> b = {"anger", "rage"};
  const std::vector<std::string> c = {"rage", "anger"};
  CHECK(cluster_content_hash(a) == cluster_content_hash(b));
  CHECK(cluster_content_hash(a) != cluster_content_hash(c));
  CHECK(cluster_content_hash({}) == "cbf29ce484222325");
  // Member boundaries matter: {"ab"} and {"a","b"} must differ.
  CHECK(cluster_content_hash({"ab"}) != cluster_content_hash({"a", "b"}));
}

TEST_CASE("parse_judgments reads the header and entries") {
  std::istringstream in(
      "# judged by the first annotator\n"
      "annotator\tann1\n"
      "fire\tdeadbeef\tvalid\n"
      "fire\tfeedface\tinvalid\n");
  const auto file = parse_judgments(in);
  CHECK(file.annotator == "ann1");
  REQUIRE(file.entries.size() == 2);
  CHECK(file.entries[0].source == "fire");
  CHECK(file.entries[0].cluster_hash == "deadbeef");
  CHECK(file.entries[0].valid);
  CHECK(!file.entries[1].valid);
}

TEST_CASE("parse_judgments rejects malformed files") {
  auto expect_error = [](const char* text, const char* needle) {
    std::istringstream in(text);
    try {
      parse_judgments(in);
      FAIL_CHECK("expected data_error for: " << text);
    } catch (const data_error& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("fire\tdeadbeef\tvalid\n", "annotator");
  expect_error("annotator\tann1\nfire\tdeadbeef\tmaybe\n", "verdict");
  expect_error("annotator\tann1\nfire\tvalid\n", "3 tab-separated");
  expect_error("", "no 'annotator' header");
}

TEST_CASE("parse_gold defaults lexicalizations to the label") {
  std::istringstream in(
      "fire\temotion\n"
      "fire\tviolence\tanger,war\n"
      "child\tseed\n");
  const auto gold = parse_gold(in);
  CHECK(gold.size() == 3);
  REQUIRE(gold.sources.size() == 2);
  CHECK(gold.sources[0].first == "fire");
  REQUIRE(gold.sources[0].second.size() == 2);
  CHECK(gold.sources[0].second[0].lexicalizations == std::vector<std::string>{"emotion"});
  CHECK(gold.sources[0].second[1].lexicalizations == std::vector<std::string>({"anger", "war"}));
}

TEST_CASE("parse_gold rejects duplicates and empty tokens") {
  {
    std::istringstream in("fire\temotion\nfire\temotion\n");
    CHECK_THROWS_AS(parse_gold(in), data_error);
  }
  {
    std::istringstream in("fire\temotion\tanger,,rage\n");
    CHECK_THROWS_AS(parse_gold(in), data_error);
  }
  {
    std::istringstream in("fire\temotion\textra\tfield\n");
    CHECK_THROWS_AS(parse_gold(in), data_error);
  }
}

TEST_CASE("precision reproduces the two-annotator worked example") {
  std::vector<MetaphorMapping> mappings;
  for (int i = 0; i < 10; ++i) {
    mappings.push_back(make_mapping("fire", {"member" + std::to_string(i)}, i + 1));
  }
  std::string first = "annotator\tann1\n";
  std::string second = "annotator\tann2\n";
  for (int i = 0; i < 10; ++i) {
    first += judged_line(mappings[static_cast<std::size_t>(i)], i < 7 ? "valid" : "invalid");
    second += judged_line(mappings[static_cast<std::size_t>(i)], i < 9 ? "valid" : "invalid");
  }
  std::istringstream in1(first), in2(second);
  const std::vector<JudgmentFile> judgments = {parse_judgments(in1), parse_judgments(in2)};

  const auto report = precision(mappings, judgments);
  REQUIRE(report.per_annotator.size() == 2);
  CHECK(report.per_annotator[0].second == 7.0 / 10.0);
  CHECK(report.per_annotator[1].second == 9.0 / 10.0);
  CHECK(report.average == (7.0 / 10.0 + 9.0 / 10.0) / 2.0);
}

TEST_CASE("precision requires full judgment coverage") {
  const std::vector<MetaphorMapping> mappings = {make_mapping("fire", {"anger"})};
  std::istringstream in("annotator\tann1\nfire\twronghash\tvalid\n");
  const std::vector<JudgmentFile> judgments = {parse_judgments(in)};
  try {
    precision(mappings, judgments);
    FAIL_CHECK("expected data_error");
  } catch (const data_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("fire") != std::string::npos);
    CHECK(msg.find("ann1") != std::string::npos);
  }
}

TEST_CASE("precision is undefined over zero mappings") {
  std::istringstream in("annotator\tann1\n");
  const std::vector<JudgmentFile> judgments = {parse_judgments(in)};
  CHECK_THROWS_AS(precision({}, judgments), data_error);
  CHECK_THROWS_AS(precision({make_mapping("fire", {"anger"})}, {}), data_error);
}

TEST_CASE("recall reproduces the two-target worked example") {
  std::istringstream in("fire\temotion\nfire\tviolence\n");
  const auto gold = parse_gold(in);
  const std::vector<MetaphorMapping> mappings = {
      make_mapping("fire", {"emotion", "bystander"})};
  const auto report = recall(mappings, gold);
  CHECK(report.recall == 0.5);
  CHECK(report.hits == 1);
  CHECK(report.gold_size == 2);
  REQUIRE(report.outcomes.size() == 2);
  CHECK(report.outcomes[0].label == "emotion");
  CHECK(report.outcomes[0].hit);
  CHECK(!report.outcomes[1].hit);
}

TEST_CASE("recall matches any listed lexicalization exactly") {
  std::istringstream in("fire\tviolence\twar,rage\n");
  const auto gold = parse_gold(in);
  CHECK(recall({make_mapping("fire", {"rage"})}, gold).recall == 1.0);
  CHECK(recall({make_mapping("fire", {"violence"})}, gold).recall == 0.0);
  CHECK(recall({make_mapping("fire", {"Rage"})}, gold).recall == 0.0);
  CHECK(recall({make_mapping("smoke", {"rage"})}, gold).recall == 0.0);
}

TEST_CASE("recall over an empty mapping set is zero") {
  std::istringstream in("fire\temotion\n");
  const auto gold = parse_gold(in);
  const auto report = recall({}, gold);
  CHECK(report.recall == 0.0);
  CHECK(report.hits == 0);
}

TEST_CASE("recall rejects an empty gold standard") {
  CHECK_THROWS_AS(recall({make_mapping("fire", {"anger"})}, GoldStandard{}), data_error);
}

TEST_CASE("cohen_kappa reproduces the hand-evaluated 2x2 table") {
  std::vector<bool> first, second;
  for (int i = 0; i < 20; ++i) { first.push_back(true); second.push_back(true); }
  for (int i = 0; i < 20; ++i) { first.push_back(false); second.push_back(false); }
  for (int i = 0; i < 10; ++i) { first.push_back(true); second.push_back(false); }
  for (int i = 0; i < 10; ++i) { first.push_back(false); second.push_back(true); }
  const double expected = (40.0 / 60.0 - 0.5) / (1.0 - 0.5);
  CHECK(cohen_kappa(first, second) == expected);
  CHECK(cohen_kappa(second, first) == cohen_kappa(first, second));
}

TEST_CASE("cohen_kappa handles perfect and degenerate agreement") {
  const std::vector<bool> mixed = {true, false, true, true};
  CHECK(cohen_kappa(mixed, mixed) == 1.0);
  const std::vector<bool> constant = {true, true, true};
  CHECK(cohen_kappa(constant, constant) == 1.0);
}

TEST_CASE("cohen_kappa validates its inputs") {
  CHECK_THROWS_AS(cohen_kappa({true}, {true, false}), data_error);
  CHECK_THROWS_AS(cohen_kappa({}, {}), data_error);
}

TEST_CASE("results table renders two-decimal cells with dashes for gaps") {
  std::vector<SystemScore> rows(2);
  rows[0].system = "hgfc";
  rows[0].precision = 0.69;
  rows[0].recall = 0.61;
  rows[1].system = "agg";
  rows[1].precision = 0.36;
  rows[1].recall = 0.11;
  const std::string table = render_results_table(rows);
  CHECK(table.find("system  P     R\n") != std::string::npos);
  CHECK(table.find("hgfc    0.69  0.61\n") != std::string::npos);
  CHECK(table.find("agg     0.36  0.11\n") != std::string::npos);

  std::vector<SystemScore> partial(1);
  partial[0].system = "hgfc";
  partial[0].recall = 0.5;
  const std::string gap = render_results_table(partial);
  CHECK(gap.find("hgfc       -  0.50\n") != std::string::npos);
}
