// Copyright 2026 The GCFL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gcfl/graph.hpp"
#include "gcfl/stats.hpp"
#include "oracles.hpp"

using namespace gcfl;
using namespace gcfl::oracle;
namespace fs = std::filesystem;

namespace {

Graph path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}

Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e);
}

Graph star_graph(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}

Graph cycle_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return make_graph(n, e);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("make_graph canonicalizes edges and validate enforces invariants") {
  Graph g = make_graph(4, {{1, 0}, {0, 1}, {2, 2}, {3, 2}});
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {2, 3}});
  CHECK(g.feat_dim() == 1);
  g.edges.emplace_back(0, 7);
  CHECK_THROWS_AS(g.validate(), ArgumentError);
}

TEST_CASE("erdos_renyi_gnm contracts") {
  SUBCASE("edge budget forces K4") {
    Graph g = erdos_renyi_gnm(4, 6, 123);
    CHECK(g.edges == complete_graph(4).edges);
  }
  SUBCASE("m = 0 is edgeless") { CHECK(erdos_renyi_gnm(5, 0, 9).edges.empty()); }
  SUBCASE("deterministic under seed") {
    CHECK(erdos_renyi_gnm(10, 15, 7).edges == erdos_renyi_gnm(10, 15, 7).edges);
    CHECK(erdos_renyi_gnm(10, 15, 7).edges != erdos_renyi_gnm(10, 15, 8).edges);
  }
  SUBCASE("too many edges") { CHECK_THROWS_AS(erdos_renyi_gnm(4, 7, 1), ArgumentError); }
  SUBCASE("exactly m distinct valid edges") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
      const int n = std::uniform_int_distribution<int>(0, 40)(rng);
      const std::int64_t maxm = std::int64_t(n) * (n - 1) / 2;
      const std::int64_t m = std::uniform_int_distribution<std::int64_t>(0, maxm)(rng);
      Graph g = erdos_renyi_gnm(n, m, rng());
      CHECK(static_cast<std::int64_t>(g.num_edges()) == m);
      CHECK_NOTHROW(g.validate());
    }
  }
  SUBCASE("edges are close to uniform") {
    // Each of the 10 pairs of K5 appears in m/10 of samples on average.
    std::vector<int> hits(25, 0);
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
      for (auto [u, v] : erdos_renyi_gnm(5, 3, t).edges) ++hits[u * 5 + v];
    }
    for (int u = 0; u < 5; ++u)
      for (int v = u + 1; v < 5; ++v) {
        CHECK(std::fabs(hits[u * 5 + v] / double(trials) - 0.3) < 0.02);
      }
  }
}

TEST_CASE("degree kurtosis") {
  Dataset star{"star", {star_graph(9)}, 1, 2};
  // Degrees [9, 1 x 9]: mean 1.8, m2 = 5.76, m4 = 269.1072, ratio 73/9.
  CHECK(degree_kurtosis(star) == doctest::Approx(73.0 / 9.0).epsilon(1e-14));
  Dataset cycle{"cycle", {cycle_graph(6)}, 1, 2};
  CHECK_THROWS_AS(degree_kurtosis(cycle), UndefinedStatisticError);
}

TEST_CASE("shortest path, largest component, clustering on small graphs") {
  CHECK(avg_shortest_path(path_graph(3)) == doctest::Approx(4.0 / 3.0));
  for (int n = 2; n <= 8; ++n) CHECK(avg_shortest_path(complete_graph(n)) == 1.0);
  CHECK_THROWS_AS(avg_shortest_path(make_graph(3, {})), UndefinedStatisticError);
  CHECK_THROWS_AS(avg_shortest_path(make_graph(1, {})), UndefinedStatisticError);

  CHECK(largest_component_fraction(path_graph(5)) == 100.0);
  CHECK(largest_component_fraction(make_graph(4, {{0, 1}, {1, 2}})) == 75.0);

  CHECK(avg_clustering_coefficient(complete_graph(3)) == 1.0);
  CHECK(avg_clustering_coefficient(star_graph(4)) == 0.0);
  for (int n = 3; n <= 9; ++n) CHECK(avg_clustering_coefficient(complete_graph(n)) == 1.0);
}

TEST_CASE("properties match brute-force references on random graphs") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 50; ++t) {
    Graph g = random_graph(rng, 12);
    const double asp = ref_asp(g);
    if (std::isnan(asp)) {
      CHECK_THROWS_AS(avg_shortest_path(g), UndefinedStatisticError);
    } else {
      CHECK(std::fabs(avg_shortest_path(g) - asp) <= 1e-12);
    }
    CHECK(std::fabs(largest_component_fraction(g) - ref_lc(g)) <= 1e-12);
    CHECK(std::fabs(avg_clustering_coefficient(g) - ref_cc(g)) <= 1e-12);
    std::vector<Graph> one{g};
    auto degs = degrees(g);
    if (std::adjacent_find(degs.begin(), degs.end(), std::not_equal_to<>()) != degs.end()) {
      CHECK(std::fabs(degree_kurtosis(std::span<const Graph>(one)) - ref_kurtosis(one)) <=
            1e-12);
    }
  }
}

TEST_CASE("welch t-test against frozen scipy values") {
  // scipy.stats.ttest_ind(a, b, equal_var=False)
  std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, 10, 12};
  auto r = stats::welch_t_test(a, b);
  CHECK(r.t == doctest::Approx(-2.3763541031440183).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.04928433820673049).epsilon(1e-9));
  std::vector<double> c{0.3, 1.1, -0.4, 2.2, 0.9, 1.7, 0.1}, d{1.0, 1.2, 0.8, 1.1};
  r = stats::welch_t_test(c, d);
  CHECK(r.t == doctest::Approx(-0.5106557626133786).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.6259756341715734).epsilon(1e-9));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n0(0.0, 1.0), n5(5.0, 1.0);
  std::vector<double> x(100), y(100);
  for (auto& v : x) v = n0(rng);
  for (auto& v : y) v = n5(rng);
  CHECK(stats::welch_t_test(x, y).p_value < 1e-6);
  CHECK(stats::welch_t_test(x, x).p_value == 1.0);
}

TEST_CASE("spearman correlation") {
  std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(stats::spearman(x, std::vector<double>{2, 4, 6, 8, 10}) == doctest::Approx(1.0));
  CHECK(stats::spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  // Ties get average ranks: ranks of y are [1.5, 1.5, 3, 4, 5]; covariance 9.5.
  CHECK(stats::spearman(x, std::vector<double>{1, 1, 2, 3, 4}) ==
        doctest::Approx(9.5 / std::sqrt(10.0 * 9.5)));
}

TEST_CASE("property significance") {
  std::mt19937_64 rng(77);
  Dataset ds{"rand", {}, 1, 2};
  for (int i = 0; i < 30; ++i) ds.graphs.push_back(random_graph(rng, 12));

  SUBCASE("identity null model gives p = 1") {
    auto report = property_significance(
        ds, 1, [](const Graph& g, std::uint64_t) { return g; });
    for (const auto& row : report.rows) {
      CHECK(row.computed);
      CHECK(row.p_value == 1.0);
      CHECK(row.real == row.random);
    }
  }
  SUBCASE("invariant to graph order") {
    auto a = property_significance(ds, 5);
    Dataset shuffled = ds;
    std::shuffle(shuffled.graphs.begin(), shuffled.graphs.end(), rng);
    auto b = property_significance(shuffled, 5);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].real == b.rows[i].real);
      CHECK(a.rows[i].random == b.rows[i].random);
      CHECK(a.rows[i].p_value == b.rows[i].p_value);
    }
  }
  SUBCASE("ranges and csv") {
    auto r = property_significance(ds, 5);
    const auto& lc = r.at(Property::kLargestComponent);
    CHECK(lc.real >= 0.0);
    CHECK(lc.real <= 100.0);
    const auto& cc = r.at(Property::kClusteringCoefficient);
    CHECK(cc.random >= 0.0);
    CHECK(cc.random <= 1.0);
    for (const auto& row : r.rows) {
      CHECK(row.p_value >= 0.0);
      CHECK(row.p_value <= 1.0);
    }
    std::ostringstream out;
    r.write_csv(out);
    CHECK(out.str().rfind("property,real,random,p_value\ndegree_kurtosis,", 0) == 0);
  }
  SUBCASE("mostly undefined property is flagged") {
    Dataset edgeless{"e", {}, 1, 2};
    for (int i = 0; i < 4; ++i) edgeless.graphs.push_back(make_graph(3, {}));
    edgeless.graphs.push_back(path_graph(3));
    auto r = property_significance(edgeless, 1);
    CHECK_FALSE(r.at(Property::kAvgShortestPath).computed);
    CHECK(r.at(Property::kLargestComponent).computed);
  }
}

TEST_CASE("TU loader on the shipped fixture") {
  Dataset ds = load_tu_dataset(GCFL_TEST_DATA_DIR, "TOY");
  REQUIRE(ds.graphs.size() == 3);
  CHECK(ds.num_classes == 2);
  CHECK(ds.feat_dim == 3);  // node labels {0, 1, 2} one-hot
  CHECK(ds.graphs[0].label == 0);
  CHECK(ds.graphs[1].label == 1);
  CHECK(ds.graphs[0].edges == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(ds.graphs[1].edges == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(ds.graphs[2].num_nodes == 4);
  CHECK(ds.graphs[2].edges.size() == 2);
  CHECK(ds.graphs[2].features(3, 0) == 1.0);
  CHECK(ds.graphs[0].features(2, 1) == 1.0);
  for (const auto& g : ds.graphs) CHECK_NOTHROW(g.validate());
}

TEST_CASE("TU loader features, nesting and errors") {
  const fs::path dir = fs::temp_directory_path() / "gcfl_tu_test";
  fs::remove_all(dir);
  fs::create_directories(dir / "ATT");
  const fs::path d = dir / "ATT";
  write_file(d / "ATT_A.txt", "1,2\n2,1\n3,4\n");
  write_file(d / "ATT_graph_indicator.txt", "1\n1\n2\n2\n");
  write_file(d / "ATT_graph_labels.txt", "3\n7\n");
  write_file(d / "ATT_node_attributes.txt", "0.5, 1.5\n2,3\n4,5\n6,7\n");
  write_file(d / "ATT_node_labels.txt", "1\n4\n4\n1\n");

  // Files nested in <root>/<name>/ are found too.
  Dataset ds = load_tu_dataset(dir, "ATT");
  CHECK(ds.feat_dim == 4);
  CHECK(ds.graphs[0].features.row(0)[0] == 0.5);
  CHECK(ds.graphs[0].features(0, 2) == 1.0);
  CHECK(ds.graphs[0].features(1, 3) == 1.0);
  CHECK(ds.graphs[1].label == 1);

  SUBCASE("missing mandatory file names it") {
    fs::remove(d / "ATT_graph_labels.txt");
    try {
      load_tu_dataset(dir, "ATT");
      FAIL("expected IngestionError");
    } catch (const IngestionError& e) {
      CHECK(std::string(e.what()).find("ATT_graph_labels.txt") != std::string::npos);
    }
  }
  SUBCASE("node index out of range") {
    write_file(d / "ATT_A.txt", "1,2\n3,9\n");
    CHECK_THROWS_AS(load_tu_dataset(dir, "ATT"), CorruptDatasetError);
  }
  SUBCASE("empty directory") {
    fs::create_directories(dir / "empty");
    CHECK_THROWS_AS(load_tu_dataset(dir / "empty", "ATT"), IngestionError);
  }
  fs::remove_all(dir);
}
