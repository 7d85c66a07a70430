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
#include <span>
#include <vector>

#include "gcfl/common.hpp"
#include "gcfl/graph.hpp"

namespace gcfl::gnn {

struct GinShape {
  std::size_t input_dim = 1;
  std::size_t hidden = 64;
  std::size_t num_layers = 3;
  std::size_t output_dim = 2;

  std::size_t layer_input(std::size_t layer) const {
    return layer == 0 ? input_dim : hidden;
  }
  std::size_t param_count() const;
  bool operator==(const GinShape&) const = default;
};

// Offsets of each parameter block inside the flat parameter vector.
// Per layer: eps, W1 (in x hidden), b1, W2 (hidden x hidden), b2; then the
// classifier Wc (hidden x output), bc.
struct GinLayout {
  struct Layer {
    std::size_t eps, w1, b1, w2, b2, in;
  };
  std::vector<Layer> layers;
  std::size_t wc = 0, bc = 0, total = 0;

  explicit GinLayout(const GinShape& shape);
};

// GIN parameters as one flat vector; flatten/unflatten are copies.
class GinModel {
 public:
  GinModel() : GinModel(GinShape{}) {}
  explicit GinModel(const GinShape& shape);

  // eps = 0; weights and biases uniform in +-1/sqrt(fan_in).
  static GinModel initialized(const GinShape& shape, std::uint64_t seed);

  const GinShape& shape() const { return shape_; }
  const GinLayout& layout() const { return layout_; }
  std::span<const double> flatten() const { return params_; }
  std::span<double> params() { return params_; }
  void unflatten(std::span<const double> flat);

 private:
  GinShape shape_;
  GinLayout layout_;
  std::vector<double> params_;
};

// h'_v = MLP((1 + eps) h_v + sum_{u in N(v)} h_u), MLP = Linear-ReLU-Linear;
// graph embedding = sum of final node states; logits = linear classifier.
std::vector<double> gin_forward(const GinModel& model, const Graph& graph);

// Negative log-softmax at `label`.
double cross_entropy(std::span<const double> logits, int label);

struct LossGrad {
  double loss = 0.0;          // mean cross-entropy over the batch
  std::vector<double> grad;   // d loss / d params, flattened
};

LossGrad gin_backward(const GinModel& model, std::span<const Graph* const> batch);
LossGrad gin_backward(const GinModel& model, std::span<const Graph> batch);

// ---- Optimizer ------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 5e-4;
};

struct AdamState {
  AdamConfig config;
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t n, const AdamConfig& cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

// L2-coupled weight decay (grad += weight_decay * params) followed by the
// bias-corrected Adam update.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad);

// ---- Simple graph convolution ----------------------------------------------

// D^-1/2 (A + I) D^-1/2 as a dense n x n matrix.
Matrix normalized_adjacency(const Graph& graph);
Matrix normalized_adjacency(int num_nodes, const std::vector<std::pair<int, int>>& edges);
// L^K X
Matrix propagate(const Matrix& lap, const Matrix& features, int hops);

struct SgcModel {
  int hops = 0;
  Matrix theta;  // feat_dim x num_classes
};

struct SgcTrainConfig {
  int hops = 2;
  int steps = 200;
  double lr = 0.5;
  std::uint64_t seed = 0;
};

// Full-batch gradient descent on mean node cross-entropy of softmax(S theta)
// where S are propagated features. theta starts uniform in +-1/sqrt(feat_dim).
Matrix softmax_regression(const Matrix& inputs, std::span<const int> labels,
                          int num_classes, int steps, double lr, std::uint64_t seed,
                          std::vector<double>* loss_trace = nullptr);

SgcModel sgc_train(const Graph& graph, std::span<const int> node_labels,
                   const SgcTrainConfig& config, int num_classes = 0,
                   std::vector<double>* loss_trace = nullptr);

double frobenius_distance(const Matrix& a, const Matrix& b);

// Weight sensitivity of SGC under growing perturbations of one input. Each
// series has one point per perturbation level.
struct SensitivitySeries {
  std::vector<double> input_change;   // ||L' - L||_F or ||X' - X||_F
  std::vector<double> weight_change;  // ||theta' - theta||_F
  double spearman = 0.0;
};

struct SensitivityConfig {
  int num_nodes = 30;
  double edge_prob = 0.15;
  int feat_dim = 8;
  int num_classes = 3;
  int levels = 20;
  int edges_per_level = 2;
  double feature_noise_per_level = 0.05;
  SgcTrainConfig train{2, 300, 0.5, 0};
};

SensitivitySeries sgc_structure_sensitivity(const SensitivityConfig& config,
                                            std::uint64_t seed);
SensitivitySeries sgc_feature_sensitivity(const SensitivityConfig& config,
                                          std::uint64_t seed);

// ---- Features and checkpoints ----------------------------------------------

// Replaces node features with one-hot degrees of width max_degree + 1;
// larger degrees land in the last bucket.
Graph one_hot_degree_features(const Graph& graph, int max_degree);

// Shape header (input_dim, hidden, layers, output_dim) as uint64 LE, followed
// by the flat parameters as float64 LE.
void save_checkpoint(std::ostream& out, const GinModel& model);
GinModel load_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const GinModel& model);
GinModel load_checkpoint(const std::filesystem::path& path);

}  // namespace gcfl::gnn
