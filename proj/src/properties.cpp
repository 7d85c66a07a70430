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
#include <iomanip>
#include <optional>
#include <ostream>
#include <queue>

#include "gcfl/graph.hpp"
#include "gcfl/stats.hpp"

namespace gcfl {
namespace {

double kurtosis_of(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  if (!(m2 > 1e-300)) {
    throw UndefinedStatisticError("degree kurtosis undefined: zero degree variance");
  }
  return m4 / (m2 * m2);
}

std::vector<int> bfs_distances(const Adjacency& adj, int n, int source) {
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::vector<int> queue;
  queue.reserve(static_cast<std::size_t>(n));
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int v : adj.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::uint64_t content_hash(const Graph& g, std::uint64_t seed) {
  std::uint64_t h = derive_seed(seed, static_cast<std::uint64_t>(g.num_nodes));
  for (const auto& [u, v] : g.edges) {
    h = derive_seed(h, (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v));
  }
  return h;
}

std::optional<double> per_graph(Property p, const Graph& g) {
  try {
    switch (p) {
      case Property::kDegreeKurtosis:
        return degree_kurtosis(std::span<const Graph>(&g, 1));
      case Property::kAvgShortestPath:
        return avg_shortest_path(g);
      case Property::kLargestComponent:
        return largest_component_fraction(g);
      case Property::kClusteringCoefficient:
        return avg_clustering_coefficient(g);
    }
  } catch (const UndefinedStatisticError&) {
  }
  return std::nullopt;
}

double sorted_mean(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return stats::mean(xs);
}

}  // namespace

double degree_kurtosis(std::span<const Graph> graphs) {
  std::vector<double> pooled;
  for (const Graph& g : graphs) {
    for (int d : degrees(g)) pooled.push_back(d);
  }
  if (pooled.empty()) throw UndefinedStatisticError("degree kurtosis of empty graph set");
  std::sort(pooled.begin(), pooled.end());
  // Degrees are integers, so with c = n*d - sum(d) the central moments are
  // exact integers: kurtosis = n * sum(c^4) / sum(c^2)^2. One rounding at the
  // end; the floating path is only a fallback for 128-bit overflow.
  using i128 = __int128;
  const i128 n = static_cast<i128>(pooled.size());
  i128 total = 0;
  for (double d : pooled) total += static_cast<i128>(d);
  i128 a = 0, b = 0;
  bool overflow = false;
  for (double d : pooled) {
    const i128 c = n * static_cast<i128>(d) - total;
    i128 c2 = 0, c4 = 0;
    overflow = overflow || __builtin_mul_overflow(c, c, &c2) ||
               __builtin_mul_overflow(c2, c2, &c4) || __builtin_add_overflow(a, c4, &a) ||
               __builtin_add_overflow(b, c2, &b);
    if (overflow) break;
  }
  if (overflow) return kurtosis_of(pooled);
  if (b == 0) throw UndefinedStatisticError("degree kurtosis undefined: zero degree variance");
  const long double lb = static_cast<long double>(b);
  return static_cast<double>(static_cast<long double>(n) * static_cast<long double>(a) /
                             (lb * lb));
}

double degree_kurtosis(const Dataset& dataset) { return degree_kurtosis(dataset.graphs); }

double avg_shortest_path(const Graph& g) {
  if (g.num_nodes < 2) {
    throw UndefinedStatisticError("avg shortest path needs >= 2 nodes");
  }
  const Adjacency adj = build_adjacency(g);
  long long total = 0;
  long long pairs = 0;
  for (int s = 0; s < g.num_nodes; ++s) {
    const auto dist = bfs_distances(adj, g.num_nodes, s);
    for (int t = s + 1; t < g.num_nodes; ++t) {
      if (dist[t] > 0) {
        total += dist[t];
        ++pairs;
      }
    }
  }
  if (pairs == 0) throw UndefinedStatisticError("avg shortest path: no connected pair");
  return static_cast<double>(total) / static_cast<double>(pairs);
}

double largest_component_fraction(const Graph& g) {
  if (g.num_nodes < 1) throw ArgumentError("largest component of empty graph");
  const Adjacency adj = build_adjacency(g);
  std::vector<char> seen(static_cast<std::size_t>(g.num_nodes), 0);
  int best = 0;
  std::vector<int> stack;
  for (int s = 0; s < g.num_nodes; ++s) {
    if (seen[s]) continue;
    int size = 0;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      ++size;
      for (int v : adj.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    best = std::max(best, size);
  }
  return 100.0 * best / g.num_nodes;
}

double avg_clustering_coefficient(const Graph& g) {
  if (g.num_nodes < 1) throw ArgumentError("clustering coefficient of empty graph");
  const Adjacency adj = build_adjacency(g);
  std::vector<char> mark(static_cast<std::size_t>(g.num_nodes), 0);
  double sum = 0.0;
  for (int v = 0; v < g.num_nodes; ++v) {
    const int d = adj.degree(v);
    if (d < 2) continue;
    for (int u : adj.neighbors(v)) mark[u] = 1;
    long long links = 0;
    for (int u : adj.neighbors(v)) {
      for (int w : adj.neighbors(u)) links += mark[w];
    }
    for (int u : adj.neighbors(v)) mark[u] = 0;
    // Each neighbor-neighbor link was counted from both ends.
    sum += static_cast<double>(links) / (static_cast<double>(d) * (d - 1));
  }
  return sum / g.num_nodes;
}

const char* property_name(Property p) {
  switch (p) {
    case Property::kDegreeKurtosis:
      return "degree_kurtosis";
    case Property::kAvgShortestPath:
      return "avg_shortest_path";
    case Property::kLargestComponent:
      return "largest_component_pct";
    case Property::kClusteringCoefficient:
      return "clustering_coefficient";
  }
  return "unknown";
}

const PropertyRow& PropertyReport::at(Property p) const {
  for (const auto& r : rows) {
    if (r.property == p) return r;
  }
  throw ArgumentError("property not present in report");
}

void PropertyReport::write_csv(std::ostream& out) const {
  out << "property,real,random,p_value\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << property_name(r.property) << ',';
    if (r.computed) {
      out << r.real << ',' << r.random << ',' << r.p_value << '\n';
    } else {
      out << "NA,NA,NA\n";
    }
  }
}

Graph gnm_null_model(const Graph& real, std::uint64_t seed) {
  return erdos_renyi_gnm(real.num_nodes, static_cast<std::int64_t>(real.num_edges()),
                         seed);
}

PropertyReport property_significance(const Dataset& dataset, std::uint64_t seed,
                                     const NullModel& null_model) {
  if (dataset.graphs.empty()) throw ArgumentError("property_significance: empty dataset");
  std::vector<Graph> random;
  random.reserve(dataset.graphs.size());
  for (const Graph& g : dataset.graphs) {
    random.push_back(null_model(g, content_hash(g, seed)));
  }

  PropertyReport report;
  for (Property p : kAllProperties) {
    PropertyRow row;
    row.property = p;
    std::vector<double> real_vals, rand_vals;
    for (const Graph& g : dataset.graphs) {
      if (auto v = per_graph(p, g)) real_vals.push_back(*v);
    }
    for (const Graph& g : random) {
      if (auto v = per_graph(p, g)) rand_vals.push_back(*v);
    }
    const std::size_t n = dataset.graphs.size();
    const bool enough = 2 * real_vals.size() >= n && 2 * rand_vals.size() >= n &&
                        real_vals.size() >= 2 && rand_vals.size() >= 2;
    if (!enough) {
      report.rows.push_back(row);
      continue;
    }
    std::sort(real_vals.begin(), real_vals.end());
    std::sort(rand_vals.begin(), rand_vals.end());
    row.computed = true;
    if (p == Property::kDegreeKurtosis) {
      try {
        row.real = degree_kurtosis(dataset.graphs);
        row.random = degree_kurtosis(random);
      } catch (const UndefinedStatisticError&) {
        row.computed = false;
        report.rows.push_back(row);
        continue;
      }
    } else {
      row.real = sorted_mean(real_vals);
      row.random = sorted_mean(rand_vals);
    }
    row.p_value = stats::welch_t_test(real_vals, rand_vals).p_value;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace gcfl
