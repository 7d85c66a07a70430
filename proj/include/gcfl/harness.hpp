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


#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gcfl/fed.hpp"
#include "gcfl/hetero.hpp"

namespace gcfl::harness {

enum class Setting { kOneDS, kMultiDS, kSynthetic };
enum class FeatureMode { kOriginal, kOneHotDegree };

// Two client groups with different structure and disjoint node-feature
// blocks: group A on ER(nodes, p_a) with one-hot types in dims 0-3, group B on
// ER(nodes, p_b) with dims 4-7. Dim 8 marks a random share of nodes in both
// groups; A labels 1 when more than half the nodes are marked, B labels 1 when
// fewer than half are, so one shared model cannot fit both groups early on.
// The groups also hold different amounts of data, so their clients take a
// different number of local steps per round.
struct SyntheticConfig {
  int clients_per_group = 4;
  std::size_t graphs_per_client = 100;   // group A
  std::size_t graphs_per_client_b = 250; // group B; 0 = same as A
  int nodes = 30;
  double p_a = 0.1;
  double p_b = 0.5;
};

struct ExperimentConfig {
  Setting setting = Setting::kOneDS;
  std::string dataset;                // oneDS
  std::string group;                  // multiDS: molecules | biochem | mix
  std::vector<std::string> datasets;  // multiDS explicit list, overrides group
  std::filesystem::path data_root = "data";
  int num_clients = 10;
  std::size_t per_client_graphs = 100;
  double test_fraction = 0.1;
  bool overlap = false;
  bool label_skew = false;
  FeatureMode feature_mode = FeatureMode::kOriginal;
  int max_degree = 0;  // one-hot width; 0 = dataset maximum
  std::vector<Algorithm> algorithms{Algorithm::kSelfTrain, Algorithm::kFedAvg,
                                    Algorithm::kFedProx, Algorithm::kGcfl,
                                    Algorithm::kGcflPlus};
  std::vector<std::uint64_t> seeds{0};
  FedConfig fed;
  SyntheticConfig synthetic;
  hetero::HeteroParams hetero;
  bool hetero_report = true;
  std::filesystem::path output_dir = "out";

  void validate() const;
};

// key = value lines; '#' starts a comment. Unknown keys are errors.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
void apply_setting(ExperimentConfig& config, const std::string& assignment);
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
// Documented key list with defaults, in config-file syntax.
std::string config_reference();

std::vector<std::string> group_datasets(const std::string& group);
bool is_social_dataset(const std::string& name);
// Replaces node features by one-hot degrees of width max_degree + 1
// (max_degree 0 = dataset maximum).
Dataset with_onehot_degree(Dataset ds, int max_degree);

// Clients hold data only; models are set by unify_feature_space.
std::vector<ClientState> partition_one_dataset(const Dataset& dataset, int num_clients,
                                               std::size_t per_client, double test_fraction,
                                               bool overlap, std::uint64_t seed,
                                               bool label_skew = false);

std::vector<ClientState> build_multi_dataset_group(const std::vector<std::string>& names,
                                                   const std::filesystem::path& data_root,
                                                   double test_fraction, std::uint64_t seed,
                                                   int max_degree = 0);

struct SyntheticFederation {
  std::vector<ClientState> clients;
  std::vector<int> group;  // 0 or 1 per client
};
SyntheticFederation make_two_group_federation(const SyntheticConfig& config,
                                              double test_fraction, std::uint64_t seed);

// Zero-pads node features to the largest dimension, sets config.shape input
// and output sizes, and gives every client a fresh model and optimizer.
void unify_feature_space(std::vector<ClientState>& clients, FedConfig& config);

struct MetricsSummary {
  std::vector<double> accuracies;
  double average = 0.0;
  double min_gain = 0.0;
  double improved_ratio = 0.0;
};
MetricsSummary compute_metrics(const std::vector<double>& accuracies,
                               const std::vector<double>& selftrain);

struct ClusterHetero {
  int cluster_id = 0;
  std::vector<int> members;
  double structure = 0.0;  // mean over member-client pairs
  double feature = 0.0;
  std::size_t pairs = 0;
};
struct ClusterHeteroReport {
  double global_structure = 0.0;  // mean over all client pairs
  double global_feature = 0.0;
  std::vector<ClusterHetero> clusters;
  double intra_structure = 0.0;  // pooled over within-cluster client pairs
  double intra_feature = 0.0;
  std::size_t intra_pairs = 0;
};
// Client-to-client heterogeneity of their graph sets (train and test).
ClusterHeteroReport cluster_heterogeneity_report(const std::vector<std::vector<int>>& clusters,
                                                 const std::vector<int>& cluster_ids,
                                                 const std::vector<ClientState>& clients,
                                                 const hetero::HeteroParams& params);

std::vector<double> final_accuracies(const FederationResult& result);

// True when the first split event separates the groups in `group` exactly.
bool first_split_matches(const FederationResult& result, const std::vector<int>& group);

// Builds the clients for one seed according to the setting.
std::vector<ClientState> build_clients(const ExperimentConfig& config, std::uint64_t seed,
                                       FedConfig& fed, std::vector<int>* groups = nullptr);

struct AlgorithmRun {
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::kFedAvg;
  FederationResult result;
  MetricsSummary metrics;
};

// Runs every algorithm for every seed, writes rounds.csv, clusters.csv,
// splits.csv, norms.csv, summary.csv and hetero.csv to output_dir.
std::vector<AlgorithmRun> run_experiment(const ExperimentConfig& config);

struct CalibrationPoint {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double validation_accuracy = 0.0;
  std::size_t clusters = 0;
};
struct CalibrationResult {
  std::vector<CalibrationPoint> grid;
  CalibrationPoint best;
};
// Grid search on a validation split carved from each client's training set,
// using the first seed and the first clustered algorithm in the config. Empty
// grids are filled from quantiles of a probe run with clustering disabled.
CalibrationResult calibrate(const ExperimentConfig& config, int rounds,
                            std::vector<double> eps1_grid, std::vector<double> eps2_grid);
void write_calibration_csv(std::ostream& out, const CalibrationResult& result);

}  // namespace gcfl::harness
