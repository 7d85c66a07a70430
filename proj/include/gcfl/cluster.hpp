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
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gcfl/common.hpp"

namespace gcfl {

struct ClusterConfig {
  double eps1 = 0.0;  // split only when the mean update norm is below this
  double eps2 = 0.0;  // ... and some client's update norm exceeds this
  std::size_t min_split_size = 3;
  int warmup_rounds = 20;

  void validate() const;
};

struct ClusterState {
  int id = 0;
  std::vector<int> members;  // client ids, ascending
  std::vector<double> model;
  double delta_mean = 0.0;
  double delta_max = 0.0;
};

struct SplitDecision {
  bool should_split = false;
  double delta_mean = 0.0;
  double delta_max = 0.0;
};

// Norm of the size-weighted mean update and the largest single update norm.
SplitDecision split_check(std::span<const std::vector<double>> deltas,
                          std::span<const std::size_t> sizes, const ClusterConfig& config,
                          int round);

// Pairwise cosine similarity; rows of zero vectors are all zero.
Matrix cosine_matrix(std::span<const std::vector<double>> deltas);

// max(0, alpha) + 1e-6 off the diagonal, 0 on it.
Matrix to_cut_weights(const Matrix& alpha);

struct MinCut {
  std::vector<int> side_a;  // contains vertex 0, ascending
  std::vector<int> side_b;  // ascending
  double value = 0.0;
};

// Global minimum cut of a symmetric nonnegative weight matrix. Phases start
// from vertex 0 and ties go to the smallest index.
MinCut stoer_wagner_mincut(const Matrix& weights);

// Splits a cluster by the min cut of `weights` (indexed like cluster.members).
// Both children keep the parent model; ids are `next_id` and `next_id + 1`.
// Returns nullopt for clusters with fewer than 2 members.
struct Bipartition {
  ClusterState first, second;
  double cut_value = 0.0;
};
std::optional<Bipartition> bipartition_cluster(const ClusterState& cluster,
                                               const Matrix& weights, int next_id);

// model += sum_i (sizes_i / sum sizes) * deltas_i over the members.
void cluster_aggregate(ClusterState& cluster, std::span<const std::vector<double>> deltas,
                       std::span<const std::size_t> sizes);

// ---- Gradient-norm sequences ----------------------------------------------

class NormWindow {
 public:
  NormWindow(std::size_t num_clients, std::size_t length = 10);

  void push(std::span<const double> norms);
  // Oldest first.
  std::vector<double> sequence(int client) const;
  std::size_t fill(int client) const;
  std::size_t length() const { return length_; }
  std::size_t num_clients() const { return buffers_.size(); }

 private:
  std::size_t length_;
  std::vector<std::vector<double>> buffers_;
  std::vector<std::size_t> head_;
  std::vector<std::size_t> fill_;
};

void push_norms(NormWindow& window, std::span<const double> norms);

// Divides by the population standard deviation; near-constant input is
// returned unchanged with a warning.
std::vector<double> standardize_row(std::span<const double> seq);

// DTW with |a_i - b_j| cost, full table, boundary anchored.
double dtw_distance(std::span<const double> a, std::span<const double> b);

Matrix dtw_matrix(const NormWindow& window, std::span<const int> members, bool standardize);

// max(beta) - beta + 1e-6 off the diagonal, 0 on it.
Matrix dtw_to_cut_weights(const Matrix& beta);

}  // namespace gcfl
