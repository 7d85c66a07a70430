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


#include "gcfl/graph.hpp"

#include <algorithm>
#include <iostream>
#include <random>
#include <unordered_set>

namespace gcfl {

void log_warning(const std::string& message) {
  std::cerr << "[warn] " << message << '\n';
}

void Graph::validate() const {
  if (num_nodes < 0) throw ArgumentError("graph has negative node count");
  if (features.rows != static_cast<std::size_t>(num_nodes)) {
    throw ArgumentError("feature rows do not match node count");
  }
  if (features.cols < 1) throw ArgumentError("feature dimension must be >= 1");
  if (features.data.size() != features.rows * features.cols) {
    throw ArgumentError("feature storage size mismatch");
  }
  std::vector<std::pair<int, int>> sorted = edges;
  for (const auto& [u, v] : sorted) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw ArgumentError("edge endpoint out of range");
    }
    if (u == v) throw ArgumentError("self-loop in graph");
    if (u > v) throw ArgumentError("edge not stored in canonical orientation");
  }
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ArgumentError("duplicate edge in graph");
  }
}

Graph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges, int label) {
  Graph g;
  g.num_nodes = num_nodes;
  g.label = label;
  for (auto& [u, v] : edges) {
    if (u > v) std::swap(u, v);
  }
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  g.features = Matrix(static_cast<std::size_t>(num_nodes), 1, 1.0);
  g.validate();
  return g;
}

Adjacency build_adjacency(const Graph& g) {
  Adjacency adj;
  adj.offsets.assign(static_cast<std::size_t>(g.num_nodes) + 1, 0);
  for (const auto& [u, v] : g.edges) {
    ++adj.offsets[u + 1];
    ++adj.offsets[v + 1];
  }
  for (int v = 0; v < g.num_nodes; ++v) adj.offsets[v + 1] += adj.offsets[v];
  adj.targets.resize(adj.offsets.back());
  std::vector<int> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const auto& [u, v] : g.edges) {
    adj.targets[fill[u]++] = v;
    adj.targets[fill[v]++] = u;
  }
  for (int v = 0; v < g.num_nodes; ++v) {
    std::sort(adj.targets.begin() + adj.offsets[v],
              adj.targets.begin() + adj.offsets[v + 1]);
  }
  return adj;
}

std::vector<int> degrees(const Graph& g) {
  std::vector<int> deg(static_cast<std::size_t>(g.num_nodes), 0);
  for (const auto& [u, v] : g.edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

void Dataset::validate() const {
  if (num_classes < 2) throw ArgumentError("dataset must have >= 2 classes");
  for (const Graph& g : graphs) {
    g.validate();
    if (g.feat_dim() != feat_dim) throw ArgumentError("inconsistent feat_dim");
    if (g.label < 0 || g.label >= num_classes) {
      throw ArgumentError("graph label out of range");
    }
  }
}

Graph erdos_renyi_gnm(int n, std::int64_t m, std::uint64_t seed) {
  if (n < 0 || m < 0) throw ArgumentError("erdos_renyi_gnm: negative size");
  const std::int64_t total = static_cast<std::int64_t>(n) * (n - 1) / 2;
  if (m > total) {
    throw ArgumentError("erdos_renyi_gnm: m exceeds n(n-1)/2");
  }
  // Floyd's algorithm over the pair index space [0, total).
  std::mt19937_64 rng(seed);
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(m) * 2);
  for (std::int64_t j = total - m; j < total; ++j) {
    std::uniform_int_distribution<std::int64_t> pick(0, j);
    const std::int64_t t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::int64_t> ids(chosen.begin(), chosen.end());
  std::sort(ids.begin(), ids.end());

  // Pair index k enumerates (u, v), u < v, row by row.
  std::vector<std::pair<int, int>> edges;
  edges.reserve(ids.size());
  std::int64_t row_start = 0;
  int u = 0;
  for (std::int64_t k : ids) {
    while (k >= row_start + (n - 1 - u)) {
      row_start += n - 1 - u;
      ++u;
    }
    edges.emplace_back(u, static_cast<int>(u + 1 + (k - row_start)));
  }
  Graph g;
  g.num_nodes = n;
  g.edges = std::move(edges);
  g.features = Matrix(static_cast<std::size_t>(n), 1, 1.0);
  return g;
}

}  // namespace gcfl
