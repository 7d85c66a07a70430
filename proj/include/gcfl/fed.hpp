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
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gcfl/cluster.hpp"
#include "gcfl/gnn.hpp"
#include "gcfl/graph.hpp"

namespace gcfl {

struct ClientState {
  int id = 0;
  std::string name;  // dataset or group tag, informational
  int num_classes = 0;
  std::vector<Graph> train_graphs;
  std::vector<Graph> test_graphs;
  gnn::GinModel params;
  gnn::AdamState optimizer;
  std::vector<double> last_delta;
  std::mt19937_64 rng;  // batch shuffling stream, persists across rounds

  std::size_t data_size() const { return train_graphs.size(); }
};

// Replaces model, optimizer and shuffle stream with fresh ones for `shape`.
void reset_training_state(ClientState& client, const gnn::GinShape& shape,
                          const gnn::AdamConfig& adam, std::uint64_t run_seed);

// Fresh client with a zero optimizer state and its own shuffle stream.
ClientState make_client(int id, std::vector<Graph> train, std::vector<Graph> test,
                        const gnn::GinShape& shape, const gnn::AdamConfig& adam,
                        std::uint64_t run_seed);

struct Prox {
  double mu = 0.0;
  std::span<const double> anchor;
};

struct LocalResult {
  std::vector<double> delta;
  double train_loss = 0.0;  // mean batch loss over the last epoch (no prox term)
};

// Loads start_params, runs `epochs` of shuffled mini-batch Adam and returns
// final - start. nullopt when the client has no training graphs.
std::optional<LocalResult> local_train(ClientState& client, std::span<const double> start_params,
                                       int epochs, std::size_t batch_size,
                                       const std::optional<Prox>& prox);

// Mean cross-entropy plus (mu/2) ||theta - anchor||^2, with its gradient.
gnn::LossGrad prox_objective(const gnn::GinModel& model, std::span<const Graph* const> batch,
                             const Prox& prox);

// base + sum_i (sizes_i / sum sizes) deltas_i
std::vector<double> fedavg_aggregate(std::span<const std::vector<double>> deltas,
                                     std::span<const std::size_t> sizes,
                                     std::span<const double> base);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};
// Mean loss and accuracy; ties in the logits resolve to the lowest class.
Evaluation evaluate(const gnn::GinModel& model, std::span<const Graph> graphs);

enum class Algorithm { kSelfTrain, kFedAvg, kFedProx, kGcfl, kGcflPlus };
std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct FedConfig {
  gnn::GinShape shape;
  gnn::AdamConfig adam;
  int rounds = 200;
  int local_epochs = 1;
  std::size_t batch_size = 128;
  double mu = 0.01;
  std::uint64_t seed = 0;
  ClusterConfig cluster;
  std::size_t window = 10;
  bool standardize = false;
  bool clustering = true;  // false keeps gcfl/gcflplus in one cluster
};

struct ClientRound {
  int client_id = 0;
  int cluster_id = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  double grad_norm = 0.0;
};

struct RoundReport {
  int round = 0;
  std::vector<ClientRound> clients;  // ordered by client id
  std::vector<std::vector<int>> clusters;  // members per cluster, by cluster id
  std::vector<int> cluster_ids;
  std::vector<double> delta_mean;  // per cluster, before any split this round
  std::vector<double> delta_max;
};

struct SplitEvent {
  int round = 0;
  int parent = 0;
  int child_a = 0;
  int child_b = 0;
  std::vector<int> members_a;
  std::vector<int> members_b;
  double delta_mean = 0.0;
  double delta_max = 0.0;
  double cut_value = 0.0;
  // gcflplus only: norm window per parent member at split time
  std::vector<std::pair<int, std::vector<double>>> norm_windows;
};

struct FederationResult {
  std::vector<RoundReport> rounds;
  std::vector<SplitEvent> splits;
  std::vector<ClusterState> clusters;  // final
};

// Called after every round with the result so far; returning false ends the
// run early. A stopped run is an exact prefix of the full one.
using RoundObserver = std::function<bool(const FederationResult&)>;

// Clients are modified in place (parameters, optimizer, shuffle stream).
// Each client starts from GinModel::initialized(shape, seed).
FederationResult run_federation(std::vector<ClientState>& clients, Algorithm algorithm,
                                const FedConfig& config, const RoundObserver& observer = {});

}  // namespace gcfl
