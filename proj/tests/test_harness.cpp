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


#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gcfl/harness.hpp"

using namespace gcfl;
using namespace gcfl::harness;

namespace {

Dataset numbered_dataset(std::size_t n, int classes = 2) {
  Dataset ds{"NUM", {}, 1, classes};
  for (std::size_t i = 0; i < n; ++i) {
    // node count encodes the graph index, so graphs are identifiable
    const int nodes = 2 + static_cast<int>(i);
    ds.graphs.push_back(make_graph(nodes, {{0, 1}}, static_cast<int>(i % classes)));
  }
  return ds;
}

std::set<int> ids_of(const ClientState& c) {
  std::set<int> s;
  for (const auto* set : {&c.train_graphs, &c.test_graphs})
    for (const auto& g : *set) s.insert(g.num_nodes);
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_synthetic() {
  ExperimentConfig cfg;
  cfg.setting = Setting::kSynthetic;
  cfg.synthetic = SyntheticConfig{.clients_per_group = 2, .graphs_per_client = 10, .graphs_per_client_b = 0, .nodes = 12, .p_a = 0.15, .p_b = 0.5};
  cfg.test_fraction = 0.2;
  cfg.fed.shape.hidden = 8;
  cfg.fed.shape.num_layers = 2;
  cfg.fed.rounds = 4;
  cfg.fed.batch_size = 4;
  cfg.fed.cluster = ClusterConfig{10.0, 1e-9, 3, 2};
  cfg.hetero.awe_length = 3;
  cfg.hetero.bins = 10;
  cfg.seeds = {3, 4};
  return cfg;
}

}  // namespace

TEST_CASE("configuration parsing") {
  std::istringstream in(
      "# comment\n"
      "setting = multiDS\n"
      "group = biochem   # trailing comment\n"
      "algorithms = fedavg, gcflplus\n"
      "seeds = 1,2,3\n"
      "eps1 = 0.05\n"
      "eps2=0.1\n"
      "standardize = true\n"
      "hidden = 32\n");
  ExperimentConfig c = parse_config(in);
  CHECK(c.setting == Setting::kMultiDS);
  CHECK(c.group == "biochem");
  CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::kFedAvg, Algorithm::kGcflPlus});
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.fed.cluster.eps1 == 0.05);
  CHECK(c.fed.cluster.eps2 == 0.1);
  CHECK(c.fed.standardize);
  CHECK(c.fed.shape.hidden == 32);
  CHECK_NOTHROW(c.validate());
  apply_setting(c, "rounds=7");
  CHECK(c.fed.rounds == 7);

  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_WITH_AS(parse_config(unknown), doctest::Contains("line 1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "rounds=ten"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "overlap=maybe"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "setting"), ConfigError);
  ExperimentConfig bad;
  bad.dataset = "X";
  bad.test_fraction = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  ExperimentConfig no_eps;
  no_eps.dataset = "X";
  CHECK_THROWS_AS(no_eps.validate(), ConfigError);

  // the documented reference is itself a loadable config once eps values are set
  std::string ref = config_reference();
  ref += "eps1 = 0.1\neps2 = 0.2\n";
  std::istringstream refin(ref);
  ExperimentConfig d = parse_config(refin);
  CHECK(d.fed.rounds == 200);
  CHECK(d.fed.batch_size == 128);
  CHECK(d.fed.adam.lr == 0.001);
  CHECK(d.fed.mu == 0.01);
}

TEST_CASE("dataset groups") {
  CHECK(group_datasets("molecules") ==
        std::vector<std::string>{"MUTAG", "BZR", "COX2", "DHFR", "PTC_MR", "AIDS", "NCI1"});
  CHECK(group_datasets("biochem").size() == 10);
  CHECK(group_datasets("mix").size() == 13);
  CHECK(group_datasets("mix").back() == "IMDB-MULTI");
  CHECK_THROWS_AS(group_datasets("proteins"), ConfigError);
  CHECK(is_social_dataset("COLLAB"));
  CHECK_FALSE(is_social_dataset("DD"));
}

TEST_CASE("single-dataset partition") {
  Dataset ds = numbered_dataset(1000);
  SUBCASE("disjoint cover") {
    auto clients = partition_one_dataset(ds, 10, 100, 0.1, false, 7);
    REQUIRE(clients.size() == 10);
    std::set<int> all;
    for (const auto& c : clients) {
      CHECK(c.train_graphs.size() == 90);
      CHECK(c.test_graphs.size() == 10);
      for (int id : ids_of(c)) CHECK(all.insert(id).second);
    }
    CHECK(all.size() == 1000);
    auto again = partition_one_dataset(ds, 10, 100, 0.1, false, 7);
    for (int c = 0; c < 10; ++c) CHECK(ids_of(again[c]) == ids_of(clients[c]));
    auto other = partition_one_dataset(ds, 10, 100, 0.1, false, 8);
    CHECK(ids_of(other[0]) != ids_of(clients[0]));
  }
  SUBCASE("remainders dropped") {
    auto clients = partition_one_dataset(ds, 3, 110, 0.1, false, 1);
    CHECK(clients[0].test_graphs.size() == 11);
    CHECK(clients[0].train_graphs.size() == 99);
  }
  SUBCASE("too few graphs") {
    CHECK_THROWS_AS(partition_one_dataset(ds, 11, 100, 0.1, false, 1), ConfigError);
  }
  SUBCASE("overlap mode") {
    auto clients = partition_one_dataset(ds, 20, 100, 0.1, true, 2);
    for (const auto& c : clients) CHECK(ids_of(c).size() == 100);
    CHECK_THROWS_AS(partition_one_dataset(ds, 2, 1001, 0.1, true, 1), ConfigError);
  }
  SUBCASE("label skew") {
    Dataset four = numbered_dataset(400, 4);
    auto clients = partition_one_dataset(four, 4, 100, 0.1, false, 3, true);
    for (const auto& c : clients) {
      std::set<int> labels;
      for (const auto& g : c.train_graphs) labels.insert(g.label);
      for (const auto& g : c.test_graphs) labels.insert(g.label);
      CHECK(labels.size() == 1);
    }
  }
}

TEST_CASE("multi-dataset group from disk") {
  auto clients = build_multi_dataset_group({"TOY", "TOY"}, GCFL_TEST_DATA_DIR, 0.1, 1);
  REQUIRE(clients.size() == 2);
  CHECK(clients[0].test_graphs.size() == 1);  // ceil(0.1 * 3)
  CHECK(clients[0].train_graphs.size() == 2);
  CHECK(clients[1].name == "TOY");
  CHECK_THROWS_WITH_AS(build_multi_dataset_group({"TOY", "NOPE"}, GCFL_TEST_DATA_DIR, 0.1, 1),
                       doctest::Contains("NOPE"), ConfigError);
}

TEST_CASE("feature space unification") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0, 1);
  auto graph_with_dim = [&](std::size_t dim) {
    Graph g = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 3}});
    g.features = Matrix(5, dim);
    for (auto& x : g.features.data) x = nd(rng);
    return g;
  };
  std::vector<ClientState> clients(2);
  clients[0].id = 0;
  clients[1].id = 1;
  clients[0].train_graphs = {graph_with_dim(7)};
  clients[1].train_graphs = {graph_with_dim(3)};
  clients[1].test_graphs = {graph_with_dim(3)};
  clients[1].num_classes = 3;
  const Graph original = clients[1].train_graphs[0];
  FedConfig cfg;
  cfg.shape.hidden = 5;
  unify_feature_space(clients, cfg);
  CHECK(cfg.shape.input_dim == 7);
  CHECK(cfg.shape.output_dim == 3);
  CHECK(clients[1].train_graphs[0].feat_dim() == 7);
  CHECK(clients[1].params.shape() == cfg.shape);
  for (int v = 0; v < 5; ++v)
    for (int k = 3; k < 7; ++k) CHECK(clients[1].train_graphs[0].features(v, k) == 0.0);

  // Embed a 3-input model into the 7-input one with zero weights on the padding.
  gnn::GinShape small = cfg.shape;
  small.input_dim = 3;
  auto m3 = gnn::GinModel::initialized(small, 5);
  gnn::GinModel m7(cfg.shape);
  const auto& l3 = m3.layout();
  const auto& l7 = m7.layout();
  auto p3 = m3.flatten();
  auto p7 = m7.params();
  p7[l7.layers[0].eps] = p3[l3.layers[0].eps];
  for (std::size_t k = 0; k < 3 * cfg.shape.hidden; ++k) p7[l7.layers[0].w1 + k] = p3[l3.layers[0].w1 + k];
  std::copy(p3.begin() + l3.layers[0].b1, p3.end(), p7.begin() + l7.layers[0].b1);
  auto a = gnn::gin_forward(m3, original);
  auto b = gnn::gin_forward(m7, clients[1].train_graphs[0]);
  for (std::size_t c = 0; c < a.size(); ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));

  std::vector<ClientState> same(1);
  same[0].train_graphs = {graph_with_dim(4)};
  const Matrix before = same[0].train_graphs[0].features;
  FedConfig c2;
  unify_feature_space(same, c2);
  CHECK(same[0].train_graphs[0].features == before);
  CHECK(c2.shape.input_dim == 4);
}

TEST_CASE("metrics") {
  auto m = compute_metrics({0.8, 0.6}, {0.7, 0.7});
  CHECK(m.average == doctest::Approx(0.7));
  CHECK(m.min_gain == doctest::Approx(-0.1));
  CHECK(m.improved_ratio == 0.5);
  auto same = compute_metrics({0.5, 0.9, 0.7}, {0.5, 0.9, 0.7});
  CHECK(same.min_gain == 0.0);
  CHECK(same.improved_ratio == 0.0);
  CHECK_THROWS_AS(compute_metrics({0.5}, {0.5, 0.6}), ArgumentError);
}

TEST_CASE("synthetic two-group federation") {
  SyntheticConfig even;
  even.graphs_per_client = 40;
  even.graphs_per_client_b = 0;
  auto fed = make_two_group_federation(even, 0.1, 9);
  REQUIRE(fed.clients.size() == 8);
  CHECK(fed.group == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
  int positives[2] = {0, 0};
  for (std::size_t c = 0; c < 8; ++c) {
    const auto& cl = fed.clients[c];
    CHECK(cl.train_graphs.size() == 36);
    CHECK(cl.test_graphs.size() == 4);
    const std::size_t lo = fed.group[c] == 0 ? 0 : 4;
    for (const auto& g : cl.train_graphs) {
      CHECK(g.num_nodes == 30);
      REQUIRE(g.feat_dim() == 9);
      int marked = 0;
      for (int v = 0; v < 30; ++v) {
        double type_row = 0.0;
        for (std::size_t k = 0; k < 8; ++k) {
          if (g.features(v, k) == 0.0) continue;
          CHECK(k >= lo);
          CHECK(k < lo + 4);
          type_row += g.features(v, k);
        }
        CHECK(type_row == 1.0);
        const double m = g.features(v, 8);
        CHECK((m == 0.0 || m == 1.0));
        marked += m == 1.0;
      }
      const int expect = fed.group[c] == 0 ? marked > 15 : marked < 15;
      CHECK(g.label == expect);
      positives[fed.group[c]] += g.label;
    }
  }
  // both labels occur in both groups
  CHECK(positives[0] > 20);
  CHECK(positives[0] < 124);
  CHECK(positives[1] > 20);
  CHECK(positives[1] < 124);
  // density differs between the groups
  double ea = 0, eb = 0;
  for (const auto& g : fed.clients[0].train_graphs) ea += g.num_edges();
  for (const auto& g : fed.clients[4].train_graphs) eb += g.num_edges();
  CHECK(eb > 3 * ea);

  SyntheticConfig uneven = even;
  uneven.graphs_per_client = 20;
  uneven.graphs_per_client_b = 50;
  auto fed2 = make_two_group_federation(uneven, 0.1, 9);
  CHECK(fed2.clients[0].data_size() == 18);
  CHECK(fed2.clients[7].data_size() == 45);
}

TEST_CASE("cluster heterogeneity report") {
  hetero::HeteroParams hp;
  hp.awe_length = 3;
  hp.bins = 10;
  SyntheticConfig sc{.clients_per_group = 2, .graphs_per_client = 8, .graphs_per_client_b = 0, .nodes = 16, .p_a = 0.15, .p_b = 0.6};
  auto fed = make_two_group_federation(sc, 0.25, 2);
  const auto& clients = fed.clients;
  auto global = cluster_heterogeneity_report({{0, 1, 2, 3}}, {0}, clients, hp);
  CHECK(global.clusters[0].structure == doctest::Approx(global.global_structure));
  CHECK(global.intra_structure == doctest::Approx(global.global_structure));
  CHECK(global.clusters[0].pairs == 6);

  auto truth = cluster_heterogeneity_report({{0, 1}, {2, 3}}, {1, 2}, clients, hp);
  CHECK(truth.intra_pairs == 2);
  CHECK(truth.intra_structure < truth.global_structure);

  std::vector<ClientState> twins(2);
  Graph tri = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  twins[0].id = 0;
  twins[1].id = 1;
  twins[0].train_graphs = {tri, tri, tri};
  twins[1].train_graphs = {tri, tri};
  auto zero = cluster_heterogeneity_report({{0, 1}}, {0}, twins, hp);
  CHECK(zero.intra_structure == 0.0);
  CHECK(zero.intra_feature == 0.0);
}

TEST_CASE("experiment runs are reproducible") {
  ExperimentConfig cfg = tiny_synthetic();
  const auto root = std::filesystem::temp_directory_path() / "gcfl_harness_test";
  std::filesystem::remove_all(root);
  cfg.output_dir = root / "a";
  auto runs = run_experiment(cfg);
  cfg.output_dir = root / "b";
  run_experiment(cfg);
  for (const char* f : {"rounds.csv", "clusters.csv", "splits.csv", "norms.csv", "summary.csv",
                        "hetero.csv"}) {
    const auto a = slurp(root / "a" / f);
    CHECK_MESSAGE(!a.empty(), f);
    CHECK_MESSAGE(a == slurp(root / "b" / f), f);
  }
  CHECK(runs.size() == 2 * 5);
  // the summary average is the mean of the last-round accuracy column
  for (const auto& r : runs) {
    double s = 0.0;
    for (const auto& c : r.result.rounds.back().clients) s += c.test_acc;
    CHECK(r.metrics.average == doctest::Approx(s / r.result.rounds.back().clients.size()));
  }
  // eps1 large and eps2 tiny: the first clustered round past warmup splits
  bool split_seen = false;
  for (const auto& r : runs) {
    if (r.algorithm == Algorithm::kGcfl) {
      REQUIRE_FALSE(r.result.splits.empty());
      CHECK(r.result.splits.front().round == 2);
      split_seen = true;
    }
  }
  CHECK(split_seen);
  std::filesystem::remove_all(root);
}

TEST_CASE("calibration grid") {
  ExperimentConfig cfg = tiny_synthetic();
  cfg.seeds = {1};
  auto res = calibrate(cfg, 3, {0.5, 10.0}, {1e-9});
  CHECK(res.grid.size() == 2);
  double best = 0.0;
  for (const auto& p : res.grid) best = std::max(best, p.validation_accuracy);
  CHECK(res.best.validation_accuracy == best);
  auto probe = calibrate(cfg, 4, {}, {});
  CHECK(probe.grid.size() == 25);
  std::ostringstream out;
  write_calibration_csv(out, probe);
  CHECK(out.str().rfind("eps1,eps2,validation_accuracy,clusters,best\n", 0) == 0);
}
