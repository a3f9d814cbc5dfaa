// Acceptance gate: ten checks, one pass/fail line each. Exits nonzero if any
// check fails. Needs --cli <path to the command line tool> and --data <dir
// with the bundled example corpus>.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "metaphor/agglomerative.hpp"
#include "metaphor/archive.hpp"
#include "metaphor/association.hpp"
#include "metaphor/evaluation.hpp"
#include "metaphor/hierarchy.hpp"

#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace metaphor;

namespace {

struct check_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw check_failure(what);
}

// ---- criteria 1 and 2: multiplicative update sweep -------------------------

struct SweepOutcome {
  double worst_increase = -std::numeric_limits<double>::infinity();
  double worst_colsum = 0.0;
  double worst_mass = 0.0;
  double elapsed = 0.0;
  bool ran = false;
};

Matrix<double> random_similarity(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix<double> w(n, n);
  for (Index i = 0; i < n; ++i) {
    w(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      const double v = uniform01(rng);
      w(i, j) = v;
      w(j, i) = v;
    }
  }
  return w;
}

SweepOutcome run_update_sweep() {
  const auto start = std::chrono::steady_clock::now();
  SweepOutcome out;
  const std::array<Index, 3> ns = {10, 50, 200};
  const std::array<Index, 3> ms = {2, 8, 40};
  for (int k = 0; k < 25; ++k) {
    const Index n = ns[static_cast<std::size_t>(k % 3)];
    const Index m = ms[static_cast<std::size_t>((k / 3) % 3)];
    const auto w = random_similarity(n, static_cast<std::uint64_t>(k));
    const double total = w.sum();
    auto f = init_factorization(w, m, static_cast<std::uint64_t>(k));
    double prev = divergence_cost(w, f.membership, f.cluster_mass);
    const int iterations = 120;
    for (int it = 0; it < iterations; ++it) {
      update_step(w, f.membership, f.cluster_mass);
      const double cost = divergence_cost(w, f.membership, f.cluster_mass);
      out.worst_increase = std::max(out.worst_increase, cost - prev);
      prev = cost;
      for (Index p = 0; p < m; ++p) {
        out.worst_colsum =
            std::max(out.worst_colsum, std::abs(f.membership.col(p).sum() - 1.0));
      }
      out.worst_mass =
          std::max(out.worst_mass, std::abs(f.cluster_mass.sum() - total) / total);
    }
  }
  out.elapsed = seconds_since(start);
  out.ran = true;
  return out;
}

// ---- criterion 3: brute-force grid oracle ----------------------------------

void check_grid_oracle() {
  const auto start = std::chrono::steady_clock::now();

  // All column-stochastic 4-vectors on a 0.05 grid: compositions of 20.
  std::vector<std::array<double, 4>> columns;
  for (int a = 0; a <= 20; ++a) {
    for (int b = 0; a + b <= 20; ++b) {
      for (int c = 0; a + b + c <= 20; ++c) {
        const int d = 20 - a - b - c;
        columns.push_back({a / 20.0, b / 20.0, c / 20.0, d / 20.0});
      }
    }
  }

  // Per column, the ten upper-triangle outer products h_i h_j.
  std::vector<std::array<double, 10>> products(columns.size());
  std::array<std::pair<int, int>, 10> cells;
  {
    std::size_t k = 0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) cells[k++] = {i, j};
    }
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t k = 0; k < 10; ++k) {
      products[c][k] = columns[c][static_cast<std::size_t>(cells[k].first)] *
                       columns[c][static_cast<std::size_t>(cells[k].second)];
    }
  }

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto w = random_similarity(4, 100 + seed);
    const double total = w.sum();

    std::array<double, 10> wcell;
    std::array<double, 10> weight;  // 1 on the diagonal, 2 off it
    double constant = 0.0;
    for (std::size_t k = 0; k < 10; ++k) {
      const double wij = w(cells[k].first, cells[k].second);
      wcell[k] = wij;
      weight[k] = cells[k].first == cells[k].second ? 1.0 : 2.0;
      if (wij > 0.0) constant += weight[k] * (wij * std::log(wij) - wij);
      // all-zero cells contribute only their y term
    }

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < columns.size(); ++a) {
      for (std::size_t b = a; b < columns.size(); ++b) {
        for (int split = 0; split <= 20; ++split) {
          const double l1 = total * (split / 20.0);
          const double l2 = total - l1;
          double cost = constant;
          for (std::size_t k = 0; k < 10; ++k) {
            const double y = std::max(l1 * products[a][k] + l2 * products[b][k], kUpdateEps);
            cost += weight[k] * (y - wcell[k] * std::log(y));
          }
          if (cost < best) best = cost;
        }
      }
    }

    FactorizeOptions options;
    options.seed = seed;
    const auto f = factorize(w, 2, options);
    require(f.cost <= best * 1.05 + 1e-12,
            "seed " + std::to_string(seed) + ": factorized cost " + std::to_string(f.cost) +
                " not within 5% of grid best " + std::to_string(best));
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 120.0, "took " + std::to_string(elapsed) + " s, limit 120");
}

// ---- criterion 4: toy-graph soft assignment stochasticity ------------------

void check_soft_assignment_stochastic() {
  HierarchyOptions options;
  options.m1 = 4;
  const auto graph = build_hierarchy(fixtures::toy_similarity(), options);
  for (const auto& noun : graph.lexicon.nouns()) {
    for (Index level = 1; level <= graph.depth(); ++level) {
      const auto soft = soft_assignment(graph, noun, level);
      const double gap = std::abs(soft.sum() - 1.0);
      require(gap < 1e-9, "noun '" + noun + "' level " + std::to_string(level) +
                              " sums off by " + std::to_string(gap));
    }
  }
}

// ---- criteria 5 and 6: planted corpus --------------------------------------

struct PlantedOutcome {
  std::vector<ConceptGraph> graphs;  // one per master seed
  int recovered = 0;
  double elapsed = 0.0;
  bool ran = false;
};

PlantedOutcome run_planted_recovery() {
  const auto start = std::chrono::steady_clock::now();
  PlantedOutcome out;

  const auto records = fixtures::planted_corpus(7);
  const auto lexicon = select_vocabulary(records, 2000);
  const auto features = build_feature_matrix(records, lexicon, 1);
  const auto similarity = similarity_matrix(features);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    HierarchyOptions options;
    options.m1 = 20;
    options.seed = seed;
    ConceptGraph graph = build_hierarchy(similarity, options);

    bool recovered = false;
    if (graph.depth() >= 2) {
      QueryOptions query;
      query.level = 2;
      query.top_k = 3;
      query.exact_targets = true;
      const auto result = identify_metaphors(graph, fixtures::planted_source(), query);
      for (const auto& mapping : result.mappings) {
        if (mapping.rank <= 3 && fixtures::target_overlap(mapping.members) >= 6) {
          recovered = true;
          break;
        }
      }
    }
    if (recovered) ++out.recovered;
    out.graphs.push_back(std::move(graph));
  }
  out.elapsed = seconds_since(start);
  out.ran = true;
  return out;
}

void check_hierarchy_shape(const PlantedOutcome& planted) {
  require(planted.ran, "planted corpus run was skipped");
  for (std::size_t g = 0; g < planted.graphs.size(); ++g) {
    const auto& graph = planted.graphs[g];
    const std::string tag = "seed " + std::to_string(g) + ": ";
    require(graph.levels.back().non_empty == 1,
            tag + "top level holds " + std::to_string(graph.levels.back().non_empty) +
                " populated clusters, expected 1");
    for (std::size_t l = 1; l < graph.levels.size(); ++l) {
      require(graph.levels[l].non_empty <= graph.levels[l - 1].non_empty,
              tag + "populated count rises between levels " + std::to_string(l) + " and " +
                  std::to_string(l + 1));
      require(graph.levels[l].factor.clusters() == graph.levels[l - 1].non_empty - 1,
              tag + "level " + std::to_string(l + 1) + " requested " +
                  std::to_string(graph.levels[l].factor.clusters()) + " clusters, expected " +
                  std::to_string(graph.levels[l - 1].non_empty - 1));
    }
  }
}

// ---- criterion 7: Ward oracle ----------------------------------------------

FeatureMatrix random_point_features(Index n, Index verbs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::ostringstream text;
  for (Index i = 0; i < n; ++i) {
    for (Index v = 0; v < verbs; ++v) {
      const auto count = 1 + static_cast<std::int64_t>(uniform01(rng) * 20.0);
      text << "verb" << v << "\tsubj\tnoun" << i << "\t" << count << "\n";
    }
  }
  std::istringstream in(text.str());
  const auto records = parse_triples(in);
  auto lexicon = select_vocabulary(records, static_cast<std::size_t>(n));
  return build_feature_matrix(records, std::move(lexicon), 1);
}

std::vector<Merge> brute_ward(const Matrix<double>& points) {
  struct Cluster {
    Eigen::VectorXd centroid;
    Index id;
    Index size;
  };
  const Index n = points.rows();
  std::vector<Cluster> active;
  for (Index i = 0; i < n; ++i) active.push_back({points.row(i).transpose(), i, 1});

  std::vector<Merge> merges;
  for (Index step = 0; step < n - 1; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0;
    std::size_t best_b = 0;
    std::pair<Index, Index> best_ids{0, 0};
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double na = static_cast<double>(active[a].size);
        const double nb = static_cast<double>(active[b].size);
        const double increase =
            na * nb / (na + nb) * (active[a].centroid - active[b].centroid).squaredNorm();
        const std::pair<Index, Index> ids = std::minmax(active[a].id, active[b].id);
        if (increase < best || (increase == best && ids < best_ids)) {
          best = increase;
          best_a = a;
          best_b = b;
          best_ids = ids;
        }
      }
    }
    const double na = static_cast<double>(active[best_a].size);
    const double nb = static_cast<double>(active[best_b].size);
    active[best_a].centroid =
        (na * active[best_a].centroid + nb * active[best_b].centroid) / (na + nb);
    active[best_a].id = n + step;
    active[best_a].size = static_cast<Index>(na + nb);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    merges.push_back({best_ids.first, best_ids.second, 2.0 * best, n + step});
  }
  return merges;
}

void check_ward_oracle() {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto features = random_point_features(4, 3, 500 + seed);
    const auto dendrogram = ward_cluster(features);
    const Matrix<double> points = Matrix<double>(features.values);
    const auto expected = brute_ward(points);
    require(dendrogram.merges.size() == expected.size(),
            "seed " + std::to_string(seed) + ": merge count mismatch");
    for (std::size_t t = 0; t < expected.size(); ++t) {
      const auto& got = dendrogram.merges[t];
      const auto& want = expected[t];
      require(got.left == want.left && got.right == want.right && got.id == want.id,
              "seed " + std::to_string(seed) + ": merge " + std::to_string(t) + " joined (" +
                  std::to_string(got.left) + "," + std::to_string(got.right) + "), expected (" +
                  std::to_string(want.left) + "," + std::to_string(want.right) + ")");
      require(std::abs(got.cost - want.cost) < 1e-9,
              "seed " + std::to_string(seed) + ": merge " + std::to_string(t) +
                  " cost disagrees with the direct variance computation");
    }
  }
}

// ---- criterion 8: baseline shape parity ------------------------------------

void check_baseline_parity(const PlantedOutcome& planted) {
  std::vector<std::pair<std::string, std::pair<FeatureMatrix, const ConceptGraph*>>> fixtures_set;

  // Toy fixture, built fresh.
  const auto toy_features = fixtures::toy_features();
  HierarchyOptions options;
  options.m1 = 4;
  const auto toy_graph = build_hierarchy(similarity_matrix(toy_features), options);
  fixtures_set.push_back({"toy", {toy_features, &toy_graph}});

  // Planted fixture, reusing the first seeded graph.
  FeatureMatrix planted_features;
  if (planted.ran && !planted.graphs.empty()) {
    const auto records = fixtures::planted_corpus(7);
    const auto lexicon = select_vocabulary(records, 2000);
    planted_features = build_feature_matrix(records, lexicon, 1);
    fixtures_set.push_back({"planted", {planted_features, &planted.graphs.front()}});
  }

  for (const auto& [name, pair] : fixtures_set) {
    const auto& [features, graph] = pair;
    const auto view = explicit_view(*graph);
    std::vector<Index> sizes;
    for (const auto& level : view.levels) {
      sizes.push_back(static_cast<Index>(level.clusters.size()));
    }
    const auto stack = cut_to_shape(ward_cluster(features), sizes);
    const auto baseline = baseline_graph(stack, features);
    require(baseline.depth() == graph->depth(),
            name + ": baseline depth " + std::to_string(baseline.depth()) + " vs graph depth " +
                std::to_string(graph->depth()));
    for (std::size_t l = 0; l < sizes.size(); ++l) {
      require(static_cast<Index>(baseline.levels[l].clusters.size()) == sizes[l],
              name + ": level " + std::to_string(l + 1) + " has " +
                  std::to_string(baseline.levels[l].clusters.size()) + " clusters, expected " +
                  std::to_string(sizes[l]));
    }
  }
}

// ---- criterion 9: evaluation arithmetic ------------------------------------

MetaphorMapping mock_mapping(const std::string& source, std::vector<std::string> members) {
  MetaphorMapping m;
  m.source = source;
  m.level = 3;
  m.rank = 1;
  m.cluster_id = 0;
  m.score = 0.1;
  m.members = std::move(members);
  return m;
}

JudgmentFile judge_all(const std::string& annotator,
                       const std::vector<MetaphorMapping>& mappings, std::size_t valid_count) {
  JudgmentFile file;
  file.annotator = annotator;
  for (std::size_t i = 0; i < mappings.size(); ++i) {
    file.entries.push_back({mappings[i].source, cluster_content_hash(mappings[i].members),
                            i < valid_count});
  }
  return file;
}

void check_evaluation_arithmetic() {
  // Worked example: ten mappings, annotators accept seven and nine.
  {
    std::vector<MetaphorMapping> mappings;
    for (int i = 0; i < 10; ++i) {
      mappings.push_back(mock_mapping("fire", {"m" + std::to_string(i)}));
    }
    const std::vector<JudgmentFile> judgments = {judge_all("ann1", mappings, 7),
                                                 judge_all("ann2", mappings, 9)};
    const auto report = precision(mappings, judgments);
    require(report.per_annotator[0].second == 7.0 / 10.0, "first annotator precision drifted");
    require(report.per_annotator[1].second == 9.0 / 10.0, "second annotator precision drifted");
    require(report.average == (7.0 / 10.0 + 9.0 / 10.0) / 2.0, "averaged precision drifted");
  }

  // Worked example: two gold targets, one covered.
  {
    std::istringstream gold_text("fire\temotion\nfire\tviolence\n");
    const auto gold = parse_gold(gold_text);
    const auto report = recall({mock_mapping("fire", {"emotion", "ember"})}, gold);
    require(report.recall == 0.5, "recall drifted from 1/2");
    require(report.hits == 1, "hit count drifted");
  }

  // Worked example: kappa over the (20, 20, 10, 10) verdict table.
  {
    std::vector<bool> first, second;
    for (int i = 0; i < 20; ++i) { first.push_back(true); second.push_back(true); }
    for (int i = 0; i < 20; ++i) { first.push_back(false); second.push_back(false); }
    for (int i = 0; i < 10; ++i) { first.push_back(true); second.push_back(false); }
    for (int i = 0; i < 10; ++i) { first.push_back(false); second.push_back(true); }
    const double expected = (40.0 / 60.0 - 0.5) / (1.0 - 0.5);
    require(cohen_kappa(first, second) == expected, "kappa drifted from 1/3");
  }

  // Table mock: two annotators over 50 mappings per system (34 and 35 valid
  // for the graph system, 18 and 18 for the baseline), gold of 100 pairs with
  // 61 and 11 covered. The rendered table must read 0.69/0.61 and 0.36/0.11.
  {
    const auto build_system = [](const std::string& prefix, const std::vector<int>& hits_per_source) {
      std::vector<MetaphorMapping> mappings;
      for (int s = 0; s < 10; ++s) {
        const std::string source = "src" + std::to_string(s);
        std::vector<std::string> members = {prefix + "filler" + std::to_string(s)};
        for (int h = 0; h < hits_per_source[static_cast<std::size_t>(s)]; ++h) {
          members.push_back("t" + std::to_string(s) + "_" + std::to_string(h));
        }
        mappings.push_back(mock_mapping(source, members));
        for (int extra = 0; extra < 4; ++extra) {
          mappings.push_back(
              mock_mapping(source, {prefix + "pad" + std::to_string(s * 4 + extra)}));
        }
      }
      return mappings;
    };

    std::ostringstream gold_text;
    for (int s = 0; s < 10; ++s) {
      for (int t = 0; t < 10; ++t) {
        gold_text << "src" << s << "\tt" << s << "_" << t << "\n";
      }
    }
    std::istringstream gold_in(gold_text.str());
    const auto gold = parse_gold(gold_in);
    require(gold.size() == 100, "mock gold size drifted");

    const auto hgfc = build_system("h", {7, 6, 6, 6, 6, 6, 6, 6, 6, 6});
    const auto agg = build_system("a", {2, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    require(hgfc.size() == 50 && agg.size() == 50, "mock mapping count drifted");

    std::vector<SystemScore> rows(2);
    rows[0].system = "hgfc";
    rows[0].precision =
        precision(hgfc, {judge_all("ann1", hgfc, 34), judge_all("ann2", hgfc, 35)}).average;
    rows[0].recall = recall(hgfc, gold).recall;
    rows[1].system = "agg";
    rows[1].precision =
        precision(agg, {judge_all("ann1", agg, 18), judge_all("ann2", agg, 18)}).average;
    rows[1].recall = recall(agg, gold).recall;

    const std::string table = render_results_table(rows);
    require(table.find("hgfc    0.69  0.61\n") != std::string::npos,
            "table row for the graph system reads:\n" + table);
    require(table.find("agg     0.36  0.11\n") != std::string::npos,
            "table row for the baseline reads:\n" + table);
  }
}

// ---- criterion 10: end-to-end determinism ----------------------------------

struct CliPaths {
  fs::path cli;
  fs::path data;
  fs::path work;
};

void run_cli(const CliPaths& paths, const std::string& args) {
  const std::string command =
      paths.cli.string() + " " + args + " >> " + (paths.work / "cli.log").string() + " 2>&1";
  const int status = std::system(command.c_str());
  if (status != 0) {
    std::string log;
    std::ifstream in(paths.work / "cli.log");
    std::ostringstream buf;
    buf << in.rdbuf();
    log = buf.str();
    if (log.size() > 600) log = log.substr(log.size() - 600);
    throw check_failure("command failed (" + std::to_string(status) + "): " + command + "\n" + log);
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw check_failure("missing expected output " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void check_determinism(const CliPaths& paths) {
  const fs::path triples = paths.data / "example_triples.tsv";
  require(fs::exists(triples), "missing bundled corpus " + triples.string());
  const fs::path sources = paths.data / "sources_en.txt";
  require(fs::exists(sources), "missing bundled source list " + sources.string());

  for (const char* run : {"run1", "run2"}) {
    const fs::path dir = paths.work / run;
    fs::create_directories(dir);
    const std::string out = " --out-dir " + dir.string();
    run_cli(paths, "ingest " + triples.string() + " --vocab 2000 --min-feature-count 1" + out);
    run_cli(paths, "train " + (dir / "features.json").string() +
                       " --m1 8 --seed 3 --iters 400" + out);
    run_cli(paths, "query " + (dir / "graph.mga").string() + " --sources " + sources.string() +
                       " --level 2 --top-k 5" + out);
  }

  for (const char* file : {"features.json", "graph.mga", "mappings.json", "report.txt"}) {
    const std::string first = slurp(paths.work / "run1" / file);
    const std::string second = slurp(paths.work / "run2" / file);
    require(first == second, std::string(file) + " differs between identical runs");
    require(!first.empty(), std::string(file) + " is empty");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CliPaths paths;
  for (int i = 1; i + 1 < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli") paths.cli = argv[i + 1];
    if (arg == "--data") paths.data = argv[i + 1];
  }
  if (paths.cli.empty() || paths.data.empty()) {
    std::cerr << "usage: metaphor-acceptance --cli <tool> --data <dir>\n";
    return 2;
  }
  paths.work = fs::temp_directory_path() / "metaphor-acceptance";
  std::error_code ec;
  fs::remove_all(paths.work, ec);
  fs::create_directories(paths.work);

  int failures = 0;
  const auto report = [&failures](int number, const std::string& label,
                                  const std::function<void()>& body) {
    try {
      body();
      std::cout << "PASS  " << number << "  " << label << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL  " << number << "  " << label << ": " << e.what() << "\n";
    }
  };

  SweepOutcome sweep;
  report(1, "update monotonicity on 25 seeded matrices", [&] {
    sweep = run_update_sweep();
    require(sweep.worst_increase <= 1e-10,
            "worst cost increase " + std::to_string(sweep.worst_increase));
    require(sweep.elapsed < 60.0, "took " + std::to_string(sweep.elapsed) + " s, limit 60");
  });
  report(2, "constraints hold after every update", [&] {
    require(sweep.ran, "update sweep was skipped");
    require(sweep.worst_colsum <= 1e-8,
            "worst membership column sum error " + std::to_string(sweep.worst_colsum));
    require(sweep.worst_mass <= 1e-6,
            "worst relative mass error " + std::to_string(sweep.worst_mass));
  });
  report(3, "final cost within 5% of the 0.05-grid oracle", check_grid_oracle);
  report(4, "soft assignments are stochastic on the toy graph", check_soft_assignment_stochastic);

  PlantedOutcome planted;
  report(5, "planted metaphor recovered in at least 8 of 10 seeds", [&] {
    planted = run_planted_recovery();
    require(planted.recovered >= 8, "recovered in only " + std::to_string(planted.recovered) +
                                        " of 10 seeded runs");
    require(planted.elapsed < 300.0,
            "took " + std::to_string(planted.elapsed) + " s, limit 300");
  });
  report(6, "hierarchy shape on the planted corpus", [&] { check_hierarchy_shape(planted); });
  report(7, "ward merges match the exhaustive variance oracle", check_ward_oracle);
  report(8, "baseline level sizes match the explicit graph", [&] { check_baseline_parity(planted); });
  report(9, "evaluation arithmetic and the results table", check_evaluation_arithmetic);
  report(10, "byte-identical archives and reports across reruns",
         [&] { check_determinism(paths); });

  if (failures > 0) {
    std::cout << failures << " of 10 criteria failed\n";
    return 1;
  }
  std::cout << "all 10 criteria passed\n";
  return 0;
}
