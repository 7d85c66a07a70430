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
#include <numeric>
#include <random>

#include "gcfl/gnn.hpp"
#include "gcfl/kernels.hpp"
#include "gcfl/stats.hpp"

namespace gcfl::gnn {
namespace {

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t p = 0; p < a.cols; ++p) {
      const double s = a(i, p);
      if (s != 0.0) kernels::axpy(s, b.row(p), c.row(i));
    }
  }
  return c;
}

struct BaseProblem {
  Graph graph;
  std::vector<int> labels;
};

// Random graph with Gaussian node features and labels planted by a random
// linear rule on the propagated features.
BaseProblem make_problem(const SensitivityConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(cfg.edge_prob);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < cfg.num_nodes; ++u) {
    for (int v = u + 1; v < cfg.num_nodes; ++v) {
      if (coin(rng)) edges.emplace_back(u, v);
    }
  }
  BaseProblem prob;
  prob.graph = make_graph(cfg.num_nodes, std::move(edges));
  std::normal_distribution<double> normal(0.0, 1.0);
  prob.graph.features = Matrix(static_cast<std::size_t>(cfg.num_nodes),
                               static_cast<std::size_t>(cfg.feat_dim));
  for (double& x : prob.graph.features.data) x = normal(rng);
  Matrix planted(static_cast<std::size_t>(cfg.feat_dim),
                 static_cast<std::size_t>(cfg.num_classes));
  for (double& x : planted.data) x = normal(rng);
  const Matrix scores = matmul(
      propagate(normalized_adjacency(prob.graph), prob.graph.features, cfg.train.hops),
      planted);
  for (std::size_t v = 0; v < scores.rows; ++v) {
    const auto row = scores.row(v);
    prob.labels.push_back(
        static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return prob;
}

SensitivitySeries finish(SensitivitySeries s) {
  s.spearman = stats::spearman(s.input_change, s.weight_change);
  return s;
}

}  // namespace

Matrix normalized_adjacency(int num_nodes, const std::vector<std::pair<int, int>>& edges) {
  const auto n = static_cast<std::size_t>(num_nodes);
  Matrix a(n, n);
  for (std::size_t v = 0; v < n; ++v) a(v, v) = 1.0;
  for (const auto& [u, v] : edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v) {
    double d = 0.0;
    for (std::size_t u = 0; u < n; ++u) d += a(v, u);
    inv_sqrt[v] = 1.0 / std::sqrt(d);
  }
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) a(v, u) *= inv_sqrt[v] * inv_sqrt[u];
  }
  return a;
}

Matrix normalized_adjacency(const Graph& graph) {
  return normalized_adjacency(graph.num_nodes, graph.edges);
}

Matrix propagate(const Matrix& lap, const Matrix& features, int hops) {
  if (hops < 0) throw ArgumentError("propagate: negative hop count");
  Matrix s = features;
  for (int k = 0; k < hops; ++k) s = matmul(lap, s);
  return s;
}

Matrix softmax_regression(const Matrix& inputs, std::span<const int> labels,
                          int num_classes, int steps, double lr, std::uint64_t seed,
                          std::vector<double>* loss_trace) {
  if (labels.size() != inputs.rows || inputs.rows == 0) {
    throw ArgumentError("softmax_regression: need one label per row");
  }
  const std::size_t f = inputs.cols;
  const auto c = static_cast<std::size_t>(num_classes);
  Matrix theta(f, c);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(f));
  std::uniform_real_distribution<double> init(-bound, bound);
  for (double& x : theta.data) x = init(rng);

  const double scale = 1.0 / static_cast<double>(inputs.rows);
  Matrix grad(f, c);
  std::vector<double> prob(c);
  for (int step = 0; step < steps; ++step) {
    std::fill(grad.data.begin(), grad.data.end(), 0.0);
    double loss = 0.0;
    const Matrix logits = matmul(inputs, theta);
    for (std::size_t v = 0; v < inputs.rows; ++v) {
      const auto z = logits.row(v);
      loss += cross_entropy(z, labels[v]);
      const double mx = *std::max_element(z.begin(), z.end());
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        prob[k] = std::exp(z[k] - mx);
        s += prob[k];
      }
      for (std::size_t k = 0; k < c; ++k) {
        prob[k] = (prob[k] / s - (static_cast<int>(k) == labels[v] ? 1.0 : 0.0)) * scale;
      }
      for (std::size_t i = 0; i < f; ++i) {
        const double x = inputs(v, i);
        if (x != 0.0) kernels::axpy(x, prob, grad.row(i));
      }
    }
    if (loss_trace != nullptr) loss_trace->push_back(loss * scale);
    kernels::axpy(-lr, grad.data, theta.data);
  }
  return theta;
}

SgcModel sgc_train(const Graph& graph, std::span<const int> node_labels,
                   const SgcTrainConfig& config, int num_classes,
                   std::vector<double>* loss_trace) {
  if (graph.num_nodes < 1) throw ArgumentError("sgc_train: empty graph");
  if (node_labels.size() != static_cast<std::size_t>(graph.num_nodes)) {
    throw ArgumentError("sgc_train: need one label per node");
  }
  if (num_classes <= 0) {
    num_classes = *std::max_element(node_labels.begin(), node_labels.end()) + 1;
  }
  const Matrix inputs =
      propagate(normalized_adjacency(graph), graph.features, config.hops);
  SgcModel model;
  model.hops = config.hops;
  model.theta = softmax_regression(inputs, node_labels, num_classes, config.steps,
                                   config.lr, config.seed, loss_trace);
  return model;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ArgumentError("frobenius_distance: shape mismatch");
  }
  std::vector<double> diff(a.data.size());
  kernels::sub(a.data, b.data, diff);
  return kernels::norm2(diff);
}

SensitivitySeries sgc_structure_sensitivity(const SensitivityConfig& cfg,
                                            std::uint64_t seed) {
  const BaseProblem base = make_problem(cfg, seed);
  const Matrix lap = normalized_adjacency(base.graph);
  const SgcModel ref = sgc_train(base.graph, base.labels, cfg.train, cfg.num_classes);

  // Nested perturbations: level k toggles the first k * edges_per_level node
  // pairs of one random ordering.
  std::vector<std::pair<int, int>> pairs;
  for (int u = 0; u < cfg.num_nodes; ++u) {
    for (int v = u + 1; v < cfg.num_nodes; ++v) pairs.emplace_back(u, v);
  }
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::shuffle(pairs.begin(), pairs.end(), rng);

  SensitivitySeries out;
  for (int level = 1; level <= cfg.levels; ++level) {
    std::vector<std::pair<int, int>> edges = base.graph.edges;
    const auto flips = static_cast<std::size_t>(level * cfg.edges_per_level);
    for (std::size_t k = 0; k < flips && k < pairs.size(); ++k) {
      auto it = std::find(edges.begin(), edges.end(), pairs[k]);
      if (it != edges.end()) {
        edges.erase(it);
      } else {
        edges.push_back(pairs[k]);
      }
    }
    Graph perturbed = make_graph(cfg.num_nodes, edges);
    perturbed.features = base.graph.features;
    const SgcModel m = sgc_train(perturbed, base.labels, cfg.train, cfg.num_classes);
    out.input_change.push_back(frobenius_distance(normalized_adjacency(perturbed), lap));
    out.weight_change.push_back(frobenius_distance(m.theta, ref.theta));
  }
  return finish(std::move(out));
}

SensitivitySeries sgc_feature_sensitivity(const SensitivityConfig& cfg,
                                          std::uint64_t seed) {
  const BaseProblem base = make_problem(cfg, seed);
  const SgcModel ref = sgc_train(base.graph, base.labels, cfg.train, cfg.num_classes);

  std::mt19937_64 rng(derive_seed(seed, 2));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix direction(base.graph.features.rows, base.graph.features.cols);
  for (double& x : direction.data) x = normal(rng);

  SensitivitySeries out;
  for (int level = 1; level <= cfg.levels; ++level) {
    Graph perturbed = base.graph;
    kernels::axpy(cfg.feature_noise_per_level * level, direction.data,
                  perturbed.features.data);
    const SgcModel m = sgc_train(perturbed, base.labels, cfg.train, cfg.num_classes);
    out.input_change.push_back(frobenius_distance(perturbed.features, base.graph.features));
    out.weight_change.push_back(frobenius_distance(m.theta, ref.theta));
  }
  return finish(std::move(out));
}

}  // namespace gcfl::gnn
