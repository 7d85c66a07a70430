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
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gcfl/common.hpp"

namespace gcfl {

// One labeled graph sample. Edges are undirected, stored once with
// first < second, no self-loops or duplicates.
struct Graph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  Matrix features;  // num_nodes x feat_dim
  int label = 0;

  std::size_t feat_dim() const { return features.cols; }
  std::size_t num_edges() const { return edges.size(); }

  // Throws ArgumentError if any invariant is violated.
  void validate() const;
};

// Builds a Graph from an arbitrary edge list: drops self-loops, canonicalizes
// orientation and removes duplicates. Features default to one constant column.
Graph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges,
                 int label = 0);

// Compressed adjacency: neighbors of v are
// targets[offsets[v] .. offsets[v+1]) in ascending order.
struct Adjacency {
  std::vector<int> offsets;
  std::vector<int> targets;

  std::span<const int> neighbors(int v) const {
    return {targets.data() + offsets[v],
            static_cast<std::size_t>(offsets[v + 1] - offsets[v])};
  }
  int degree(int v) const { return offsets[v + 1] - offsets[v]; }
};

Adjacency build_adjacency(const Graph& g);
std::vector<int> degrees(const Graph& g);

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  std::size_t feat_dim = 0;
  int num_classes = 0;

  void validate() const;
};

// Reads the TU text layout (<name>_A.txt, _graph_indicator.txt,
// _graph_labels.txt, optional _node_labels.txt / _node_attributes.txt).
Dataset load_tu_dataset(const std::filesystem::path& root,
                        const std::string& name);

// Uniform G(n, m): exactly m distinct undirected edges, deterministic in seed.
Graph erdos_renyi_gnm(int n, std::int64_t m, std::uint64_t seed);

// ---- Graph property statistics -------------------------------------------

// Pearson (non-excess) kurtosis of the degree sequence pooled over all graphs.
double degree_kurtosis(const Dataset& dataset);
double degree_kurtosis(std::span<const Graph> graphs);
// Mean BFS distance over connected unordered pairs.
double avg_shortest_path(const Graph& g);
// 100 * |largest component| / num_nodes.
double largest_component_fraction(const Graph& g);
double avg_clustering_coefficient(const Graph& g);

enum class Property {
  kDegreeKurtosis,
  kAvgShortestPath,
  kLargestComponent,
  kClusteringCoefficient,
};
inline constexpr Property kAllProperties[] = {
    Property::kDegreeKurtosis, Property::kAvgShortestPath,
    Property::kLargestComponent, Property::kClusteringCoefficient};
const char* property_name(Property p);

struct PropertyRow {
  Property property;
  bool computed = false;
  double real = 0.0;
  double random = 0.0;
  double p_value = 1.0;
};

struct PropertyReport {
  std::vector<PropertyRow> rows;  // one per Property, in kAllProperties order

  const PropertyRow& at(Property p) const;
  void write_csv(std::ostream& out) const;
};

// Produces the random counterpart of a real graph. The default null model is
// erdos_renyi_gnm(num_nodes, num_edges, seed).
using NullModel = std::function<Graph(const Graph& real, std::uint64_t seed)>;
Graph gnm_null_model(const Graph& real, std::uint64_t seed);

// Compares every property of the real graphs against one matched random graph
// per real graph with a Welch two-sample t-test on per-graph values. Degree
// kurtosis is reported pooled (as degree_kurtosis) for the real/random
// columns; its test uses per-graph kurtosis values. The random seed for each
// graph is derived from its content, so the report does not depend on graph
// order.
PropertyReport property_significance(const Dataset& dataset, std::uint64_t seed,
                                     const NullModel& null_model = gnm_null_model);

}  // namespace gcfl
