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
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "gcfl/harness.hpp"
#include "gcfl/kernels.hpp"
#include "gcfl/stats.hpp"

namespace gcfl::harness {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(x)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return x;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < 0) throw ConfigError(key + ": must be nonnegative");
  return static_cast<std::size_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::size_t test_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

void split_train_test(std::vector<Graph> graphs, double test_fraction, ClientState& c) {
  const std::size_t nt = std::min(graphs.size(), test_count(graphs.size(), test_fraction));
  const std::size_t cut = graphs.size() - nt;
  c.test_graphs.assign(std::make_move_iterator(graphs.begin() + cut),
                       std::make_move_iterator(graphs.end()));
  graphs.resize(cut);
  c.train_graphs = std::move(graphs);
}

std::string join_ids(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(ids[i]);
  }
  return s;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ReportError("cannot write " + path.string());
  out << std::setprecision(12);
  return out;
}

int dataset_max_degree(const Dataset& ds) {
  int mx = 1;
  for (const auto& g : ds.graphs) {
    for (int d : degrees(g)) mx = std::max(mx, d);
  }
  return mx;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

Dataset with_onehot_degree(Dataset ds, int max_degree) {
  const int width = max_degree > 0 ? max_degree : dataset_max_degree(ds);
  for (auto& g : ds.graphs) g = gnn::one_hot_degree_features(g, width);
  ds.feat_dim = static_cast<std::size_t>(width) + 1;
  return ds;
}

// ---- Configuration ----------------------------------------------------------

void ExperimentConfig::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must be in (0, 1)");
  }
  if (num_clients < 1) throw ConfigError("num_clients must be >= 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
  if (fed.rounds < 0) throw ConfigError("rounds must be >= 0");
  if (fed.local_epochs < 0) throw ConfigError("local_epochs must be >= 0");
  if (fed.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (fed.shape.hidden == 0 || fed.shape.num_layers == 0) {
    throw ConfigError("hidden and layers must be positive");
  }
  if (fed.window == 0) throw ConfigError("window must be positive");
  if (setting == Setting::kOneDS && dataset.empty()) {
    throw ConfigError("setting=oneDS needs dataset");
  }
  if (setting == Setting::kMultiDS && datasets.empty()) {
    group_datasets(group);  // throws for unknown groups
  }
  for (Algorithm a : algorithms) {
    if ((a == Algorithm::kGcfl || a == Algorithm::kGcflPlus) && fed.clustering) {
      fed.cluster.validate();
    }
  }
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw);
  if (key == "setting") {
    if (v == "oneDS") c.setting = Setting::kOneDS;
    else if (v == "multiDS") c.setting = Setting::kMultiDS;
    else if (v == "synthetic") c.setting = Setting::kSynthetic;
    else throw ConfigError("setting must be oneDS, multiDS or synthetic");
  } else if (key == "dataset") {
    c.dataset = v;
  } else if (key == "group") {
    c.group = v;
  } else if (key == "datasets") {
    c.datasets = split_list(v);
  } else if (key == "data_root") {
    c.data_root = v;
  } else if (key == "num_clients") {
    c.num_clients = static_cast<int>(parse_int(key, v));
  } else if (key == "per_client_graphs") {
    c.per_client_graphs = parse_count(key, v);
  } else if (key == "test_fraction") {
    c.test_fraction = parse_double(key, v);
  } else if (key == "overlap") {
    c.overlap = parse_bool(key, v);
  } else if (key == "label_skew") {
    c.label_skew = parse_bool(key, v);
  } else if (key == "feature_mode") {
    if (v == "original") c.feature_mode = FeatureMode::kOriginal;
    else if (v == "onehot_degree") c.feature_mode = FeatureMode::kOneHotDegree;
    else throw ConfigError("feature_mode must be original or onehot_degree");
  } else if (key == "max_degree") {
    c.max_degree = static_cast<int>(parse_int(key, v));
  } else if (key == "algorithms") {
    c.algorithms.clear();
    for (const auto& a : split_list(v)) c.algorithms.push_back(parse_algorithm(a));
  } else if (key == "seeds") {
    c.seeds.clear();
    for (const auto& s : split_list(v)) {
      c.seeds.push_back(static_cast<std::uint64_t>(parse_count(key, s)));
    }
  } else if (key == "rounds") {
    c.fed.rounds = static_cast<int>(parse_int(key, v));
  } else if (key == "local_epochs") {
    c.fed.local_epochs = static_cast<int>(parse_int(key, v));
  } else if (key == "batch_size") {
    c.fed.batch_size = parse_count(key, v);
  } else if (key == "lr") {
    c.fed.adam.lr = parse_double(key, v);
  } else if (key == "weight_decay") {
    c.fed.adam.weight_decay = parse_double(key, v);
  } else if (key == "mu") {
    c.fed.mu = parse_double(key, v);
  } else if (key == "hidden") {
    c.fed.shape.hidden = parse_count(key, v);
  } else if (key == "layers") {
    c.fed.shape.num_layers = parse_count(key, v);
  } else if (key == "eps1") {
    c.fed.cluster.eps1 = parse_double(key, v);
  } else if (key == "eps2") {
    c.fed.cluster.eps2 = parse_double(key, v);
  } else if (key == "min_split_size") {
    c.fed.cluster.min_split_size = parse_count(key, v);
  } else if (key == "warmup_rounds") {
    c.fed.cluster.warmup_rounds = static_cast<int>(parse_int(key, v));
  } else if (key == "window") {
    c.fed.window = parse_count(key, v);
  } else if (key == "standardize") {
    c.fed.standardize = parse_bool(key, v);
  } else if (key == "clustering") {
    c.fed.clustering = parse_bool(key, v);
  } else if (key == "awe_length") {
    c.hetero.awe_length = static_cast<int>(parse_int(key, v));
  } else if (key == "bins") {
    c.hetero.bins = static_cast<int>(parse_int(key, v));
  } else if (key == "pair_budget") {
    c.hetero.pair_budget = parse_count(key, v);
  } else if (key == "walk_budget") {
    c.hetero.walk_budget = parse_double(key, v);
  } else if (key == "walk_samples") {
    c.hetero.walk_samples = parse_count(key, v);
  } else if (key == "hetero_report") {
    c.hetero_report = parse_bool(key, v);
  } else if (key == "output_dir") {
    c.output_dir = v;
  } else if (key == "synthetic_clients_per_group") {
    c.synthetic.clients_per_group = static_cast<int>(parse_int(key, v));
  } else if (key == "synthetic_graphs_per_client") {
    c.synthetic.graphs_per_client = parse_count(key, v);
  } else if (key == "synthetic_graphs_per_client_b") {
    c.synthetic.graphs_per_client_b = parse_count(key, v);
  } else if (key == "synthetic_nodes") {
    c.synthetic.nodes = static_cast<int>(parse_int(key, v));
  } else if (key == "synthetic_p_a") {
    c.synthetic.p_a = parse_double(key, v);
  } else if (key == "synthetic_p_b") {
    c.synthetic.p_b = parse_double(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void apply_setting(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("expected key=value, got '" + assignment + "'");
  }
  apply_setting(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_setting(c, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

std::string config_reference() {
  return R"(# experiment
setting = oneDS              # oneDS | multiDS | synthetic
dataset = PROTEINS           # oneDS
group = molecules            # multiDS: molecules | biochem | mix
datasets =                   # multiDS explicit comma list, overrides group
data_root = data             # TU dataset directory
num_clients = 10             # oneDS
per_client_graphs = 100      # oneDS
test_fraction = 0.1
overlap = false              # oneDS: clients sample independently
label_skew = false           # oneDS: clients get label-sorted slices
feature_mode = original      # original | onehot_degree
max_degree = 0               # one-hot width, 0 = dataset maximum
algorithms = selftrain,fedavg,fedprox,gcfl,gcflplus
seeds = 0
output_dir = out
# training
rounds = 200
local_epochs = 1
batch_size = 128
lr = 0.001
weight_decay = 0.0005
mu = 0.01                    # fedprox
hidden = 64
layers = 3
# clustering
# eps1 = ...                 # required for gcfl / gcflplus, no default
# eps2 = ...
min_split_size = 3
warmup_rounds = 20
window = 10                  # gcflplus norm sequence length
standardize = false          # gcflplus row standardization
clustering = true
# heterogeneity report
hetero_report = true
awe_length = 4
bins = 20
pair_budget = 2000
walk_budget = 2e6
walk_samples = 20000
# synthetic setting
synthetic_clients_per_group = 4
synthetic_graphs_per_client = 100
synthetic_graphs_per_client_b = 250   # group B; 0 = same as group A
synthetic_nodes = 30
synthetic_p_a = 0.1
synthetic_p_b = 0.5
)";
}

// ---- Data ---------------------------------------------------------------------

std::vector<std::string> group_datasets(const std::string& group) {
  std::vector<std::string> out{"MUTAG", "BZR", "COX2", "DHFR", "PTC_MR", "AIDS", "NCI1"};
  if (group == "molecules") return out;
  for (const char* s : {"ENZYMES", "DD", "PROTEINS"}) out.emplace_back(s);
  if (group == "biochem") return out;
  for (const char* s : {"COLLAB", "IMDB-BINARY", "IMDB-MULTI"}) out.emplace_back(s);
  if (group == "mix") return out;
  throw ConfigError("unknown dataset group '" + group + "' (molecules, biochem, mix)");
}

bool is_social_dataset(const std::string& name) {
  return name == "COLLAB" || name == "IMDB-BINARY" || name == "IMDB-MULTI";
}

std::vector<ClientState> partition_one_dataset(const Dataset& dataset, int num_clients,
                                               std::size_t per_client, double test_fraction,
                                               bool overlap, std::uint64_t seed,
                                               bool label_skew) {
  if (num_clients < 1) throw ConfigError("num_clients must be >= 1");
  if (per_client == 0) throw ConfigError("per_client_graphs must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must be in (0, 1)");
  }
  const std::size_t n = dataset.graphs.size();
  const std::size_t k = static_cast<std::size_t>(num_clients);
  std::mt19937_64 rng(derive_seed(seed, 0x2000));
  std::vector<std::vector<std::size_t>> picks(k);
  if (!overlap) {
    if (k * per_client > n) {
      throw ConfigError(dataset.name + ": " + std::to_string(n) + " graphs cannot give " +
                        std::to_string(k) + " clients " + std::to_string(per_client) +
                        " disjoint graphs each");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    if (label_skew) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dataset.graphs[a].label < dataset.graphs[b].label;
      });
    }
    for (std::size_t c = 0; c < k; ++c) {
      picks[c].assign(order.begin() + c * per_client, order.begin() + (c + 1) * per_client);
      if (label_skew) std::shuffle(picks[c].begin(), picks[c].end(), rng);
    }
    if (k * per_client < n) {
      log_warning(dataset.name + ": " + std::to_string(n - k * per_client) +
                  " graphs left unassigned");
    }
  } else {
    if (per_client > n) {
      throw ConfigError(dataset.name + ": fewer graphs than per_client_graphs");
    }
    std::vector<std::size_t> order(n);
    for (std::size_t c = 0; c < k; ++c) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      picks[c].assign(order.begin(), order.begin() + per_client);
    }
  }
  std::vector<ClientState> clients;
  for (std::size_t c = 0; c < k; ++c) {
    ClientState cs;
    cs.id = static_cast<int>(c);
    cs.name = dataset.name + "-" + std::to_string(c);
    cs.num_classes = dataset.num_classes;
    std::vector<Graph> graphs;
    for (std::size_t i : picks[c]) graphs.push_back(dataset.graphs[i]);
    split_train_test(std::move(graphs), test_fraction, cs);
    clients.push_back(std::move(cs));
  }
  return clients;
}

std::vector<ClientState> build_multi_dataset_group(const std::vector<std::string>& names,
                                                   const std::filesystem::path& data_root,
                                                   double test_fraction, std::uint64_t seed,
                                                   int max_degree) {
  if (names.empty()) throw ConfigError("empty dataset group");
  std::vector<ClientState> clients;
  for (std::size_t i = 0; i < names.size(); ++i) {
    Dataset ds;
    try {
      ds = load_tu_dataset(data_root, names[i]);
    } catch (const IngestionError& e) {
      throw ConfigError("dataset " + names[i] + " is not available: " + e.what());
    }
    if (is_social_dataset(names[i])) ds = with_onehot_degree(std::move(ds), max_degree);
    std::mt19937_64 rng(derive_seed(seed, 0x3000 + i));
    std::shuffle(ds.graphs.begin(), ds.graphs.end(), rng);
    ClientState cs;
    cs.id = static_cast<int>(i);
    cs.name = names[i];
    cs.num_classes = ds.num_classes;
    split_train_test(std::move(ds.graphs), test_fraction, cs);
    clients.push_back(std::move(cs));
  }
  return clients;
}

constexpr std::size_t kSyntheticFeatDim = 9;

SyntheticFederation make_two_group_federation(const SyntheticConfig& config,
                                              double test_fraction, std::uint64_t seed) {
  if (config.clients_per_group < 1 || config.nodes < 2 || config.graphs_per_client < 2 ||
      config.graphs_per_client_b == 1) {
    throw ConfigError("synthetic federation is too small");
  }
  SyntheticFederation fed;
  const int total = 2 * config.clients_per_group;
  for (int c = 0; c < total; ++c) {
    const int group = c < config.clients_per_group ? 0 : 1;
    const double p = group == 0 ? config.p_a : config.p_b;
    std::mt19937_64 rng(derive_seed(seed, 0x5000 + static_cast<std::uint64_t>(c)));
    std::bernoulli_distribution edge(p);
    std::uniform_int_distribution<int> type(0, 3);
    std::uniform_real_distribution<double> rate(0.2, 0.8);
    const int half = config.nodes / 2;
    const std::size_t count_graphs =
        group == 1 && config.graphs_per_client_b > 0 ? config.graphs_per_client_b
                                                     : config.graphs_per_client;
    std::vector<Graph> graphs;
    for (std::size_t k = 0; k < count_graphs; ++k) {
      std::vector<std::pair<int, int>> e;
      for (int i = 0; i < config.nodes; ++i)
        for (int j = i + 1; j < config.nodes; ++j)
          if (edge(rng)) e.emplace_back(i, j);
      Graph g = make_graph(config.nodes, std::move(e));
      g.features = Matrix(static_cast<std::size_t>(config.nodes), kSyntheticFeatDim, 0.0);
      std::bernoulli_distribution marked(rate(rng));
      int count = 0;
      for (int v = 0; v < config.nodes; ++v) {
        g.features(v, static_cast<std::size_t>(4 * group + type(rng))) = 1.0;
        if (marked(rng)) {
          g.features(v, 8) = 1.0;
          ++count;
        }
      }
      g.label = group == 0 ? (count > half ? 1 : 0) : (count < half ? 1 : 0);
      graphs.push_back(std::move(g));
    }
    ClientState cs;
    cs.id = c;
    cs.name = std::string(group == 0 ? "A-" : "B-") + std::to_string(c);
    cs.num_classes = 2;
    split_train_test(std::move(graphs), test_fraction, cs);
    fed.clients.push_back(std::move(cs));
    fed.group.push_back(group);
  }
  return fed;
}

void unify_feature_space(std::vector<ClientState>& clients, FedConfig& config) {
  if (clients.empty()) throw ArgumentError("unify_feature_space: no clients");
  std::size_t dim = 0;
  int classes = 0;
  for (const auto& c : clients) {
    for (const auto* set : {&c.train_graphs, &c.test_graphs}) {
      for (const auto& g : *set) {
        dim = std::max(dim, g.feat_dim());
        classes = std::max(classes, g.label + 1);
      }
    }
    classes = std::max(classes, c.num_classes);
  }
  if (dim == 0) throw ArgumentError("unify_feature_space: graphs have no features");
  for (auto& c : clients) {
    for (auto* set : {&c.train_graphs, &c.test_graphs}) {
      for (auto& g : *set) {
        if (g.feat_dim() == dim) continue;
        Matrix padded(static_cast<std::size_t>(g.num_nodes), dim, 0.0);
        for (std::size_t v = 0; v < padded.rows; ++v) {
          std::copy(g.features.row(v).begin(), g.features.row(v).end(),
                    padded.row(v).begin());
        }
        g.features = std::move(padded);
      }
    }
  }
  config.shape.input_dim = dim;
  config.shape.output_dim = static_cast<std::size_t>(std::max(classes, 2));
  for (auto& c : clients) reset_training_state(c, config.shape, config.adam, config.seed);
}

// ---- Metrics ------------------------------------------------------------------

MetricsSummary compute_metrics(const std::vector<double>& acc,
                               const std::vector<double>& selftrain) {
  if (acc.size() != selftrain.size()) {
    throw ArgumentError("compute_metrics: client sets differ in size");
  }
  if (acc.empty()) throw ArgumentError("compute_metrics: no clients");
  MetricsSummary m;
  m.accuracies = acc;
  m.average = stats::mean(acc);
  m.min_gain = acc[0] - selftrain[0];
  std::size_t improved = 0;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    m.min_gain = std::min(m.min_gain, acc[i] - selftrain[i]);
    improved += acc[i] > selftrain[i];
  }
  m.improved_ratio = static_cast<double>(improved) / static_cast<double>(acc.size());
  return m;
}

std::vector<double> final_accuracies(const FederationResult& result) {
  if (result.rounds.empty()) throw ArgumentError("final_accuracies: no rounds");
  std::vector<double> out;
  for (const auto& c : result.rounds.back().clients) out.push_back(c.test_acc);
  return out;
}

bool first_split_matches(const FederationResult& result, const std::vector<int>& group) {
  if (result.splits.empty()) return false;
  const auto& s = result.splits.front();
  if (s.members_a.size() + s.members_b.size() != group.size()) return false;
  auto homogeneous = [&](const std::vector<int>& side) {
    for (int c : side) {
      if (group[c] != group[side.front()]) return false;
    }
    return true;
  };
  return homogeneous(s.members_a) && homogeneous(s.members_b) &&
         group[s.members_a.front()] != group[s.members_b.front()];
}

ClusterHeteroReport cluster_heterogeneity_report(const std::vector<std::vector<int>>& clusters,
                                                 const std::vector<int>& cluster_ids,
                                                 const std::vector<ClientState>& clients,
                                                 const hetero::HeteroParams& params) {
  if (clusters.empty()) throw ArgumentError("cluster_heterogeneity_report: no clusters");
  if (clusters.size() != cluster_ids.size()) {
    throw ArgumentError("cluster_heterogeneity_report: cluster id count mismatch");
  }
  const std::size_t n = clients.size();
  std::vector<std::vector<hetero::GraphSignature>> sigs(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<Graph> all = clients[c].train_graphs;
    all.insert(all.end(), clients[c].test_graphs.begin(), clients[c].test_graphs.end());
    std::size_t skipped = 0;
    sigs[c] = hetero::graph_signatures(all, params, 100 + c, skipped);
    if (2 * skipped > all.size()) {
      throw ReportError("client " + std::to_string(c) +
                        ": more than half of the graphs have no edges");
    }
  }
  Matrix st(n, n, 0.0), ft(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto r = hetero::cross_heterogeneity(sigs[i], sigs[j], params);
      st(i, j) = st(j, i) = r.structure_mean;
      ft(i, j) = ft(j, i) = r.feature_mean;
    }
  }
  auto mean_over = [&](const std::vector<int>& members, const Matrix& m, std::size_t& pairs) {
    double s = 0.0;
    pairs = 0;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        s += m(members[a], members[b]);
        ++pairs;
      }
    return pairs ? s / static_cast<double>(pairs) : 0.0;
  };
  ClusterHeteroReport rep;
  std::vector<int> everyone(n);
  std::iota(everyone.begin(), everyone.end(), 0);
  std::size_t pairs = 0;
  rep.global_structure = mean_over(everyone, st, pairs);
  rep.global_feature = mean_over(everyone, ft, pairs);
  double s_sum = 0.0, f_sum = 0.0;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    ClusterHetero ch;
    ch.cluster_id = cluster_ids[k];
    ch.members = clusters[k];
    ch.structure = mean_over(ch.members, st, ch.pairs);
    ch.feature = mean_over(ch.members, ft, ch.pairs);
    s_sum += ch.structure * static_cast<double>(ch.pairs);
    f_sum += ch.feature * static_cast<double>(ch.pairs);
    rep.intra_pairs += ch.pairs;
    rep.clusters.push_back(std::move(ch));
  }
  if (rep.intra_pairs > 0) {
    rep.intra_structure = s_sum / static_cast<double>(rep.intra_pairs);
    rep.intra_feature = f_sum / static_cast<double>(rep.intra_pairs);
  }
  return rep;
}

// ---- Experiments ----------------------------------------------------------------

std::vector<ClientState> build_clients(const ExperimentConfig& config, std::uint64_t seed,
                                       FedConfig& fed, std::vector<int>* groups) {
  std::vector<ClientState> clients;
  switch (config.setting) {
    case Setting::kOneDS: {
      Dataset ds;
      try {
        ds = load_tu_dataset(config.data_root, config.dataset);
      } catch (const IngestionError& e) {
        throw ConfigError("dataset " + config.dataset + " is not available: " + e.what());
      }
      if (config.feature_mode == FeatureMode::kOneHotDegree) {
        ds = with_onehot_degree(std::move(ds), config.max_degree);
      }
      clients = partition_one_dataset(ds, config.num_clients, config.per_client_graphs,
                                      config.test_fraction, config.overlap, seed,
                                      config.label_skew);
      break;
    }
    case Setting::kMultiDS: {
      const auto names = config.datasets.empty() ? group_datasets(config.group) : config.datasets;
      clients = build_multi_dataset_group(names, config.data_root, config.test_fraction, seed,
                                          config.max_degree);
      if (groups) {
        groups->clear();
        for (const auto& n : names) groups->push_back(is_social_dataset(n) ? 1 : 0);
      }
      break;
    }
    case Setting::kSynthetic: {
      auto syn = make_two_group_federation(config.synthetic, config.test_fraction, seed);
      clients = std::move(syn.clients);
      if (groups) *groups = syn.group;
      break;
    }
  }
  fed.seed = seed;
  unify_feature_space(clients, fed);
  return clients;
}

std::vector<AlgorithmRun> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  auto rounds_csv = open_csv(config.output_dir / "rounds.csv");
  auto clusters_csv = open_csv(config.output_dir / "clusters.csv");
  auto splits_csv = open_csv(config.output_dir / "splits.csv");
  auto norms_csv = open_csv(config.output_dir / "norms.csv");
  auto summary_csv = open_csv(config.output_dir / "summary.csv");
  auto hetero_csv = open_csv(config.output_dir / "hetero.csv");
  rounds_csv << "seed,algorithm,round,client_id,client,cluster_id,train_loss,test_loss,"
                "test_acc,grad_norm\n";
  clusters_csv << "seed,algorithm,round,cluster_id,client_ids\n";
  splits_csv << "seed,algorithm,round,parent,children,delta_mean,delta_max,cut_value,"
                "members_a,members_b\n";
  norms_csv << "seed,algorithm,round,client_id,norms\n";
  summary_csv << "seed,algorithm,num_clients,average_acc,min_gain,improved_ratio\n";
  hetero_csv << "seed,algorithm,scope,cluster_id,client_ids,structure,feature,pairs\n";

  std::vector<Algorithm> order{Algorithm::kSelfTrain};
  for (Algorithm a : config.algorithms) {
    if (a != Algorithm::kSelfTrain) order.push_back(a);
  }
  const bool report_selftrain =
      std::find(config.algorithms.begin(), config.algorithms.end(), Algorithm::kSelfTrain) !=
      config.algorithms.end();

  std::vector<AlgorithmRun> runs;
  for (std::uint64_t seed : config.seeds) {
    FedConfig fed = config.fed;
    const std::vector<ClientState> base = build_clients(config, seed, fed);
    std::vector<double> self_acc;
    for (Algorithm alg : order) {
      std::vector<ClientState> clients = base;
      AlgorithmRun run;
      run.seed = seed;
      run.algorithm = alg;
      run.result = run_federation(clients, alg, fed);
      const auto acc = final_accuracies(run.result);
      if (alg == Algorithm::kSelfTrain) self_acc = acc;
      run.metrics = compute_metrics(acc, self_acc);
      if (alg == Algorithm::kSelfTrain && !report_selftrain) continue;

      const std::string name = algorithm_name(alg);
      for (const auto& rep : run.result.rounds) {
        for (const auto& c : rep.clients) {
          rounds_csv << seed << ',' << name << ',' << rep.round << ',' << c.client_id << ','
                     << clients[c.client_id].name << ',' << c.cluster_id << ','
                     << c.train_loss << ',' << c.test_loss << ',' << c.test_acc << ','
                     << c.grad_norm << '\n';
        }
        for (std::size_t k = 0; k < rep.clusters.size(); ++k) {
          clusters_csv << seed << ',' << name << ',' << rep.round << ',' << rep.cluster_ids[k]
                       << ',' << join_ids(rep.clusters[k]) << '\n';
        }
      }
      for (const auto& s : run.result.splits) {
        splits_csv << seed << ',' << name << ',' << s.round << ',' << s.parent << ','
                   << s.child_a << ';' << s.child_b << ',' << s.delta_mean << ','
                   << s.delta_max << ',' << s.cut_value << ',' << join_ids(s.members_a) << ','
                   << join_ids(s.members_b) << '\n';
        for (const auto& [client, seq] : s.norm_windows) {
          norms_csv << seed << ',' << name << ',' << s.round << ',' << client << ',';
          for (std::size_t i = 0; i < seq.size(); ++i) norms_csv << (i ? ";" : "") << seq[i];
          norms_csv << '\n';
        }
      }
      summary_csv << seed << ',' << name << ',' << acc.size() << ',' << run.metrics.average
                  << ',' << run.metrics.min_gain << ',' << run.metrics.improved_ratio << '\n';
      const bool clustered = alg == Algorithm::kGcfl || alg == Algorithm::kGcflPlus;
      if (clustered && config.hetero_report && base.size() >= 2) {
        std::vector<std::vector<int>> members;
        std::vector<int> ids;
        for (const auto& cl : run.result.clusters) {
          members.push_back(cl.members);
          ids.push_back(cl.id);
        }
        hetero::HeteroParams hp = config.hetero;
        hp.seed = derive_seed(config.hetero.seed, seed);
        const auto hr = cluster_heterogeneity_report(members, ids, base, hp);
        std::vector<int> all(base.size());
        std::iota(all.begin(), all.end(), 0);
        hetero_csv << seed << ',' << name << ",global,," << join_ids(all) << ','
                   << hr.global_structure << ',' << hr.global_feature << ','
                   << base.size() * (base.size() - 1) / 2 << '\n';
        for (const auto& ch : hr.clusters) {
          hetero_csv << seed << ',' << name << ",cluster," << ch.cluster_id << ','
                     << join_ids(ch.members) << ',' << ch.structure << ',' << ch.feature
                     << ',' << ch.pairs << '\n';
        }
        hetero_csv << seed << ',' << name << ",intra,,," << hr.intra_structure << ','
                   << hr.intra_feature << ',' << hr.intra_pairs << '\n';
      }
      runs.push_back(std::move(run));
    }
  }
  for (auto* f : {&rounds_csv, &clusters_csv, &splits_csv, &norms_csv, &summary_csv,
                  &hetero_csv}) {
    f->flush();
    if (!*f) throw ReportError("failed writing output CSVs to " + config.output_dir.string());
  }
  return runs;
}

// ---- Calibration ----------------------------------------------------------------

CalibrationResult calibrate(const ExperimentConfig& config, int rounds,
                            std::vector<double> eps1_grid, std::vector<double> eps2_grid) {
  if (rounds < 1) throw ConfigError("calibration needs at least one round");
  Algorithm alg = Algorithm::kGcfl;
  for (Algorithm a : config.algorithms) {
    if (a == Algorithm::kGcfl || a == Algorithm::kGcflPlus) {
      alg = a;
      break;
    }
  }
  FedConfig fed = config.fed;
  fed.rounds = rounds;
  std::vector<ClientState> base = build_clients(config, config.seeds.front(), fed);
  // validation replaces the test split
  for (auto& c : base) {
    std::vector<Graph> train = std::move(c.train_graphs);
    split_train_test(std::move(train), config.test_fraction, c);
    if (c.train_graphs.empty()) throw ConfigError("client " + c.name + " too small to calibrate");
  }

  if (eps1_grid.empty() || eps2_grid.empty()) {
    FedConfig probe = fed;
    probe.clustering = false;
    auto clients = base;
    const auto res = run_federation(clients, alg, probe);
    std::vector<double> means, maxes;
    for (const auto& rep : res.rounds) {
      if (rep.round < fed.cluster.warmup_rounds) continue;
      means.insert(means.end(), rep.delta_mean.begin(), rep.delta_mean.end());
      maxes.insert(maxes.end(), rep.delta_max.begin(), rep.delta_max.end());
    }
    if (means.empty()) throw ConfigError("calibration rounds do not pass warmup_rounds");
    const std::vector<double> qs{0.1, 0.25, 0.5, 0.75, 0.9};
    if (eps1_grid.empty())
      for (double q : qs) eps1_grid.push_back(quantile(means, q));
    if (eps2_grid.empty())
      for (double q : qs) eps2_grid.push_back(quantile(maxes, q));
  }

  CalibrationResult out;
  bool have_best = false;
  for (double e1 : eps1_grid) {
    for (double e2 : eps2_grid) {
      FedConfig f = fed;
      f.cluster.eps1 = e1;
      f.cluster.eps2 = e2;
      f.clustering = true;
      f.cluster.validate();
      auto clients = base;
      const auto res = run_federation(clients, alg, f);
      CalibrationPoint p{e1, e2, stats::mean(final_accuracies(res)), res.clusters.size()};
      out.grid.push_back(p);
      if (!have_best || p.validation_accuracy > out.best.validation_accuracy) {
        out.best = p;
        have_best = true;
      }
    }
  }
  return out;
}

void write_calibration_csv(std::ostream& out, const CalibrationResult& result) {
  out << std::setprecision(12) << "eps1,eps2,validation_accuracy,clusters,best\n";
  for (const auto& p : result.grid) {
    const bool best = p.eps1 == result.best.eps1 && p.eps2 == result.best.eps2;
    out << p.eps1 << ',' << p.eps2 << ',' << p.validation_accuracy << ',' << p.clusters << ','
        << (best ? 1 : 0) << '\n';
  }
}

}  // namespace gcfl::harness
