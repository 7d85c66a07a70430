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
#include <limits>
#include <numeric>

#include "gcfl/cluster.hpp"
#include "gcfl/kernels.hpp"

namespace gcfl {
namespace {

constexpr double kCutFloor = 1e-6;

void check_square(const Matrix& m, const char* what) {
  if (m.rows != m.cols) throw ArgumentError(std::string(what) + ": matrix is not square");
}

}  // namespace

void ClusterConfig::validate() const {
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) {
    throw ConfigError("eps1 and eps2 must be positive");
  }
}

SplitDecision split_check(std::span<const std::vector<double>> deltas,
                          std::span<const std::size_t> sizes, const ClusterConfig& config,
                          int round) {
  if (deltas.empty()) throw ArgumentError("split_check: empty cluster");
  if (deltas.size() != sizes.size()) throw ArgumentError("split_check: length mismatch");
  const std::size_t dim = deltas[0].size();
  double total = 0.0;
  for (auto s : sizes) total += static_cast<double>(s);
  SplitDecision out;
  std::vector<double> mean(dim, 0.0);
  if (total > 0.0) {
    // Accumulate in a canonical order so member order does not matter.
    std::vector<std::size_t> order(deltas.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (sizes[a] != sizes[b]) return sizes[a] < sizes[b];
      return deltas[a] < deltas[b];
    });
    for (std::size_t i : order) {
      if (deltas[i].size() != dim) throw ArgumentError("split_check: delta length mismatch");
      kernels::axpy(static_cast<double>(sizes[i]) / total, deltas[i], mean);
    }
  }
  out.delta_mean = kernels::norm2(mean);
  for (const auto& d : deltas) out.delta_max = std::max(out.delta_max, kernels::norm2(d));
  out.should_split = out.delta_mean < config.eps1 && out.delta_max > config.eps2 &&
                     deltas.size() >= config.min_split_size &&
                     round >= config.warmup_rounds;
  return out;
}

Matrix cosine_matrix(std::span<const std::vector<double>> deltas) {
  const std::size_t n = deltas.size();
  if (n < 2) throw ArgumentError("cosine_matrix: need at least 2 vectors");
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (deltas[i].size() != deltas[0].size()) {
      throw ArgumentError("cosine_matrix: length mismatch");
    }
    norms[i] = kernels::norm2(deltas[i]);
  }
  Matrix a(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (norms[i] == 0.0) continue;
    a(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norms[j] == 0.0) continue;
      const double c = kernels::dot(deltas[i], deltas[j]) / (norms[i] * norms[j]);
      a(i, j) = a(j, i) = std::clamp(c, -1.0, 1.0);
    }
  }
  return a;
}

Matrix to_cut_weights(const Matrix& alpha) {
  check_square(alpha, "to_cut_weights");
  Matrix w(alpha.rows, alpha.cols, 0.0);
  for (std::size_t i = 0; i < alpha.rows; ++i)
    for (std::size_t j = 0; j < alpha.cols; ++j)
      if (i != j) w(i, j) = std::max(0.0, alpha(i, j)) + kCutFloor;
  return w;
}

MinCut stoer_wagner_mincut(const Matrix& weights) {
  check_square(weights, "stoer_wagner_mincut");
  const std::size_t n = weights.rows;
  if (n < 2) throw ArgumentError("stoer_wagner_mincut: need at least 2 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    if (weights(i, i) != 0.0) throw ArgumentError("stoer_wagner_mincut: nonzero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights(i, j);
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw ArgumentError("stoer_wagner_mincut: weights must be finite and nonnegative");
      }
      if (w != weights(j, i)) throw ArgumentError("stoer_wagner_mincut: matrix not symmetric");
    }
  }

  Matrix w = weights;
  // groups[v]: original vertices merged into super-vertex v.
  std::vector<std::vector<int>> groups(n);
  for (std::size_t v = 0; v < n; ++v) groups[v] = {static_cast<int>(v)};
  std::vector<int> alive(n);
  std::iota(alive.begin(), alive.end(), 0);

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_side;

  while (alive.size() > 1) {
    const std::size_t m = alive.size();
    std::vector<double> key(m, 0.0);
    std::vector<char> added(m, 0);
    int prev = -1, last = -1;
    for (std::size_t step = 0; step < m; ++step) {
      int pick = -1;
      for (std::size_t i = 0; i < m; ++i) {
        if (added[i]) continue;
        if (pick < 0 || key[i] > key[pick]) pick = static_cast<int>(i);
      }
      if (step == 0) pick = 0;
      added[pick] = 1;
      prev = last;
      last = pick;
      for (std::size_t i = 0; i < m; ++i) {
        if (!added[i]) key[i] += w(alive[pick], alive[i]);
      }
    }
    const double phase_cut = key[last];
    if (phase_cut < best) {
      best = phase_cut;
      best_side = groups[alive[last]];
    }
    const int s = alive[prev], t = alive[last];
    for (int v : alive) {
      if (v == s || v == t) continue;
      w(s, v) += w(t, v);
      w(v, s) = w(s, v);
    }
    groups[s].insert(groups[s].end(), groups[t].begin(), groups[t].end());
    alive.erase(alive.begin() + last);
  }

  std::vector<char> in(n, 0);
  for (int v : best_side) in[v] = 1;
  MinCut out;
  out.value = best;
  const char side0 = in[0];
  for (std::size_t v = 0; v < n; ++v) {
    (in[v] == side0 ? out.side_a : out.side_b).push_back(static_cast<int>(v));
  }
  return out;
}

std::optional<Bipartition> bipartition_cluster(const ClusterState& cluster,
                                               const Matrix& weights, int next_id) {
  if (cluster.members.size() < 2) return std::nullopt;
  if (weights.rows != cluster.members.size()) {
    throw ArgumentError("bipartition_cluster: matrix size does not match members");
  }
  const MinCut cut = stoer_wagner_mincut(weights);
  Bipartition out;
  out.cut_value = cut.value;
  out.first.id = next_id;
  out.second.id = next_id + 1;
  out.first.model = out.second.model = cluster.model;
  for (int i : cut.side_a) out.first.members.push_back(cluster.members[i]);
  for (int i : cut.side_b) out.second.members.push_back(cluster.members[i]);
  std::sort(out.first.members.begin(), out.first.members.end());
  std::sort(out.second.members.begin(), out.second.members.end());
  return out;
}

void cluster_aggregate(ClusterState& cluster, std::span<const std::vector<double>> deltas,
                       std::span<const std::size_t> sizes) {
  if (deltas.size() != cluster.members.size() || sizes.size() != deltas.size()) {
    throw ArgumentError("cluster_aggregate: expected one delta and size per member");
  }
  double total = 0.0;
  for (auto s : sizes) total += static_cast<double>(s);
  if (!(total > 0.0)) throw ArgumentError("cluster_aggregate: total size is zero");
  std::vector<double> step(cluster.model.size(), 0.0);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i].size() != cluster.model.size()) {
      throw ArgumentError("cluster_aggregate: delta length mismatch");
    }
    kernels::axpy(static_cast<double>(sizes[i]) / total, deltas[i], step);
  }
  kernels::axpy(1.0, step, cluster.model);
}

// ---- Gradient-norm sequences ----------------------------------------------

NormWindow::NormWindow(std::size_t num_clients, std::size_t length)
    : length_(length),
      buffers_(num_clients, std::vector<double>(length, 0.0)),
      head_(num_clients, 0),
      fill_(num_clients, 0) {
  if (length == 0) throw ArgumentError("NormWindow: length must be positive");
}

void NormWindow::push(std::span<const double> norms) {
  if (norms.size() != buffers_.size()) {
    throw ArgumentError("push_norms: expected one norm per client");
  }
  for (double x : norms) {
    if (!(x >= 0.0)) throw ArgumentError("push_norms: negative or NaN norm");
  }
  for (std::size_t c = 0; c < norms.size(); ++c) {
    buffers_[c][head_[c]] = norms[c];
    head_[c] = (head_[c] + 1) % length_;
    fill_[c] = std::min(fill_[c] + 1, length_);
  }
}

std::vector<double> NormWindow::sequence(int client) const {
  const auto c = static_cast<std::size_t>(client);
  if (c >= buffers_.size()) throw ArgumentError("NormWindow: unknown client");
  std::vector<double> out;
  out.reserve(fill_[c]);
  const std::size_t start = (head_[c] + length_ - fill_[c]) % length_;
  for (std::size_t k = 0; k < fill_[c]; ++k) out.push_back(buffers_[c][(start + k) % length_]);
  return out;
}

std::size_t NormWindow::fill(int client) const {
  return fill_.at(static_cast<std::size_t>(client));
}

void push_norms(NormWindow& window, std::span<const double> norms) { window.push(norms); }

std::vector<double> standardize_row(std::span<const double> seq) {
  if (seq.size() < 2) throw ArgumentError("standardize_row: need at least 2 values");
  const double n = static_cast<double>(seq.size());
  const double mean = std::accumulate(seq.begin(), seq.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : seq) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  std::vector<double> out(seq.begin(), seq.end());
  if (sd < 1e-12) {
    log_warning("standardize_row: constant sequence left unscaled");
    return out;
  }
  for (double& x : out) x /= sd;
  return out;
}

double dtw_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("dtw_distance: empty sequence");
  const std::size_t n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double best = std::min({prev[j - 1], prev[j], cur[j - 1]});
      cur[j] = std::fabs(a[i - 1] - b[j - 1]) + best;
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

Matrix dtw_matrix(const NormWindow& window, std::span<const int> members, bool standardize) {
  std::vector<std::vector<double>> rows;
  for (int c : members) {
    auto seq = window.sequence(c);
    if (seq.empty()) {
      throw ArgumentError("dtw_matrix: client " + std::to_string(c) + " has no recorded norms");
    }
    if (standardize && seq.size() >= 2) seq = standardize_row(seq);
    rows.push_back(std::move(seq));
  }
  const std::size_t n = rows.size();
  Matrix beta(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      beta(i, j) = beta(j, i) = dtw_distance(rows[i], rows[j]);
  return beta;
}

Matrix dtw_to_cut_weights(const Matrix& beta) {
  check_square(beta, "dtw_to_cut_weights");
  double mx = 0.0;
  for (double x : beta.data) mx = std::max(mx, x);
  Matrix w(beta.rows, beta.cols, 0.0);
  for (std::size_t i = 0; i < beta.rows; ++i)
    for (std::size_t j = 0; j < beta.cols; ++j)
      if (i != j) w(i, j) = mx - beta(i, j) + kCutFloor;
  return w;
}

}  // namespace gcfl
