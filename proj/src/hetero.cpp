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


#include "gcfl/hetero.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "gcfl/kernels.hpp"
#include "gcfl/stats.hpp"

namespace gcfl::hetero {
namespace {

void extend(WalkPattern& cur, int max_symbol, int length,
            std::vector<WalkPattern>& out) {
  if (static_cast<int>(cur.size()) == length + 1) {
    out.push_back(cur);
    return;
  }
  for (int s = 0; s <= max_symbol + 1; ++s) {
    if (s == cur.back()) continue;
    cur.push_back(s);
    extend(cur, std::max(max_symbol, s), length, out);
    cur.pop_back();
  }
}

std::uint64_t encode(std::span<const int> pattern, int length) {
  std::uint64_t code = 0;
  for (int s : pattern) code = code * static_cast<std::uint64_t>(length + 1) + s;
  return code;
}

// Maps pattern codes of each walk length to indices. Built once for all
// supported lengths.
const std::unordered_map<std::uint64_t, std::size_t>& pattern_index(int length) {
  using Index = std::unordered_map<std::uint64_t, std::size_t>;
  static const std::vector<Index> cache = [] {
    std::vector<Index> all(9);
    for (int len = 1; len <= 8; ++len) {
      const auto patterns = enumerate_anonymous_walks(len);
      for (std::size_t i = 0; i < patterns.size(); ++i) {
        all[len].emplace(encode(patterns[i], len), i);
      }
    }
    return all;
  }();
  return cache[length];
}

struct ExactWalker {
  const Adjacency& adj;
  int length;
  const std::unordered_map<std::uint64_t, std::size_t>& index;
  std::vector<double>& probs;
  std::vector<int> label_of;
  int next_label = 0;

  void walk(int u, int depth, std::uint64_t code, double p) {
    if (depth == length) {
      probs[index.at(code)] += p;
      return;
    }
    const auto nbrs = adj.neighbors(u);
    const double step = p / static_cast<double>(nbrs.size());
    for (int v : nbrs) {
      const bool fresh = label_of[v] < 0;
      if (fresh) label_of[v] = next_label++;
      walk(v, depth + 1, code * static_cast<std::uint64_t>(length + 1) + label_of[v],
           step);
      if (fresh) {
        label_of[v] = -1;
        --next_label;
      }
    }
  }
};

std::vector<int> non_isolated(const Adjacency& adj, int n) {
  std::vector<int> starts;
  for (int v = 0; v < n; ++v) {
    if (adj.degree(v) > 0) starts.push_back(v);
  }
  return starts;
}

void check_length(int length) {
  if (length < 1 || length > 8) {
    throw ArgumentError("anonymous walk length must be in [1, 8]");
  }
}

void check_distribution(std::span<const double> p, const char* what) {
  double s = 0.0;
  for (double x : p) {
    if (x < 0.0) throw ArgumentError(std::string(what) + " has a negative entry");
    s += x;
  }
  if (std::fabs(s - 1.0) > 1e-6) {
    throw ArgumentError(std::string(what) + " does not sum to 1");
  }
}

std::vector<GraphSignature> signatures(std::span<const Graph> graphs,
                                       const HeteroParams& params,
                                       std::uint64_t stream, std::size_t& skipped) {
  return graph_signatures(graphs, params, stream, skipped);
}

// Distinct pair indices: all of [0, total) or a seeded sample of `budget`.
std::vector<std::uint64_t> choose_pairs(std::uint64_t total, std::size_t budget,
                                        std::uint64_t seed) {
  std::vector<std::uint64_t> ids;
  if (total <= budget) {
    ids.resize(total);
    for (std::uint64_t i = 0; i < total; ++i) ids[i] = i;
    return ids;
  }
  std::mt19937_64 rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  for (std::uint64_t j = total - budget; j < total; ++j) {
    std::uniform_int_distribution<std::uint64_t> pick(0, j);
    const std::uint64_t t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  ids.assign(chosen.begin(), chosen.end());
  std::sort(ids.begin(), ids.end());
  return ids;
}

HeterogeneityReport summarize(std::vector<double> structure, std::vector<double> feature) {
  HeterogeneityReport r;
  r.pairs = structure.size();
  if (structure.empty()) return r;
  std::sort(structure.begin(), structure.end());
  std::sort(feature.begin(), feature.end());
  r.structure_mean = stats::mean(structure);
  r.structure_std = stats::population_std(structure);
  r.feature_mean = stats::mean(feature);
  r.feature_std = stats::population_std(feature);
  return r;
}

void check_skipped(std::size_t skipped, std::size_t total, const std::string& name) {
  if (2 * skipped > total) {
    throw ReportError("more than half of the graphs in " +
                      (name.empty() ? std::string("the set") : name) +
                      " have no edges; heterogeneity not computed");
  }
}

HeterogeneityReport within(std::span<const Graph> graphs, const HeteroParams& params,
                           const std::string& name) {
  if (graphs.empty()) throw ArgumentError("pairwise_heterogeneity: empty set");
  std::size_t skipped = 0;
  const auto sig = signatures(graphs, params, 0, skipped);
  check_skipped(skipped, graphs.size(), name);
  const std::uint64_t n = sig.size();
  const std::uint64_t total = n * (n - 1) / 2;
  std::vector<double> st, ft;
  const auto ids = choose_pairs(total, params.pair_budget, derive_seed(params.seed, 7));
  std::uint64_t row_start = 0;
  std::uint64_t i = 0;
  for (std::uint64_t k : ids) {
    while (k >= row_start + (n - 1 - i)) {
      row_start += n - 1 - i;
      ++i;
    }
    const std::uint64_t j = i + 1 + (k - row_start);
    st.push_back(js_distance(sig[i].awe.probs, sig[j].awe.probs));
    ft.push_back(js_divergence(sig[i].hist.mass, sig[j].hist.mass));
  }
  return summarize(std::move(st), std::move(ft));
}

}  // namespace

std::vector<WalkPattern> enumerate_anonymous_walks(int length) {
  check_length(length);
  std::vector<WalkPattern> out;
  WalkPattern cur{0};
  extend(cur, 0, length, out);
  return out;
}

double count_walks(const Graph& g, int length) {
  const Adjacency adj = build_adjacency(g);
  std::vector<double> x(static_cast<std::size_t>(g.num_nodes), 1.0), next(x.size());
  for (int step = 0; step < length; ++step) {
    for (int v = 0; v < g.num_nodes; ++v) {
      double s = 0.0;
      for (int u : adj.neighbors(v)) s += x[u];
      next[v] = s;
    }
    std::swap(x, next);
  }
  double total = 0.0;
  for (int v = 0; v < g.num_nodes; ++v) {
    if (adj.degree(v) > 0) total += x[v];
  }
  return total;
}

AweDistribution awe_distribution(const Graph& g, int length, const WalkMode& mode) {
  check_length(length);
  if (g.num_edges() == 0) {
    throw UndefinedEmbeddingError("anonymous walk embedding of an edgeless graph");
  }
  const Adjacency adj = build_adjacency(g);
  const auto& index = pattern_index(length);
  AweDistribution dist;
  dist.walk_length = length;
  dist.probs.assign(index.size(), 0.0);
  const auto starts = non_isolated(adj, g.num_nodes);

  if (std::holds_alternative<ExactWalks>(mode)) {
    ExactWalker walker{adj, length, index, dist.probs,
                       std::vector<int>(static_cast<std::size_t>(g.num_nodes), -1), 0};
    const double p0 = 1.0 / static_cast<double>(starts.size());
    for (int s : starts) {
      walker.label_of[s] = walker.next_label++;
      walker.walk(s, 0, 0, p0);
      walker.label_of[s] = -1;
      --walker.next_label;
    }
    return dist;
  }

  const auto& sampled = std::get<SampledWalks>(mode);
  if (sampled.samples == 0) throw ArgumentError("sampled walks need samples > 0");
  std::mt19937_64 rng(sampled.seed);
  std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
  std::vector<int> label_of(static_cast<std::size_t>(g.num_nodes), -1);
  std::vector<int> touched;
  std::vector<std::size_t> counts(dist.probs.size(), 0);
  for (std::size_t k = 0; k < sampled.samples; ++k) {
    int u = starts[pick_start(rng)];
    int next_label = 0;
    label_of[u] = next_label++;
    touched.assign(1, u);
    std::uint64_t code = 0;
    for (int step = 0; step < length; ++step) {
      const auto nbrs = adj.neighbors(u);
      std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
      u = nbrs[pick(rng)];
      if (label_of[u] < 0) {
        label_of[u] = next_label++;
        touched.push_back(u);
      }
      code = code * static_cast<std::uint64_t>(length + 1) + label_of[u];
    }
    ++counts[index.at(code)];
    for (int v : touched) label_of[v] = -1;
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    dist.probs[i] = static_cast<double>(counts[i]) / static_cast<double>(sampled.samples);
  }
  return dist;
}

AweDistribution awe_distribution_auto(const Graph& g, int length, double walk_budget,
                                      std::size_t samples, std::uint64_t seed) {
  if (count_walks(g, length) <= walk_budget) {
    return awe_distribution(g, length, ExactWalks{});
  }
  return awe_distribution(g, length, SampledWalks{samples, seed});
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ArgumentError("js_divergence: length mismatch");
  check_distribution(p, "p");
  check_distribution(q, "q");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    const double tp = p[i] > 0.0 ? 0.5 * p[i] * std::log2(p[i] / m) : 0.0;
    const double tq = q[i] > 0.0 ? 0.5 * q[i] * std::log2(q[i] / m) : 0.0;
    d += tp + tq;
  }
  return std::clamp(d, 0.0, 1.0);
}

double js_distance(std::span<const double> p, std::span<const double> q) {
  return std::sqrt(js_divergence(p, q));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = kernels::norm2(a);
  const double nb = kernels::norm2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(kernels::dot(a, b) / (na * nb), -1.0, 1.0);
}

int similarity_bin(double s, int bins) {
  const int b = static_cast<int>(std::floor((s + 1.0) * 0.5 * bins));
  return std::clamp(b, 0, bins - 1);
}

FeatureSimHistogram feature_sim_histogram(const Graph& g, int bins) {
  if (bins < 1) throw ArgumentError("histogram needs >= 1 bin");
  if (g.num_edges() == 0) {
    throw UndefinedEmbeddingError("feature similarity histogram of an edgeless graph");
  }
  FeatureSimHistogram h;
  h.bins = bins;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = -1.0 + 2.0 * i / bins;
  h.mass.assign(static_cast<std::size_t>(bins), 0.0);
  for (const auto& [u, v] : g.edges) {
    h.mass[similarity_bin(cosine_similarity(g.features.row(u), g.features.row(v)), bins)] +=
        1.0;
  }
  for (double& m : h.mass) m /= static_cast<double>(g.num_edges());
  return h;
}

HeterogeneityReport pairwise_heterogeneity_within(std::span<const Graph> graphs,
                                                  const HeteroParams& params) {
  return within(graphs, params, "");
}

HeterogeneityReport pairwise_heterogeneity(const Dataset& set_a, const Dataset& set_b,
                                           const HeteroParams& params) {
  if (&set_a == &set_b || (!set_a.name.empty() && set_a.name == set_b.name)) {
    return within(set_a.graphs, params, set_a.name);
  }
  if (set_a.graphs.empty() || set_b.graphs.empty()) {
    throw ArgumentError("pairwise_heterogeneity: empty set");
  }
  std::size_t skip_a = 0, skip_b = 0;
  const auto sa = signatures(set_a.graphs, params, 0, skip_a);
  const auto sb = signatures(set_b.graphs, params, 1, skip_b);
  check_skipped(skip_a, set_a.graphs.size(), set_a.name);
  check_skipped(skip_b, set_b.graphs.size(), set_b.name);
  return cross_heterogeneity(sa, sb, params);
}

std::vector<GraphSignature> graph_signatures(std::span<const Graph> graphs,
                                             const HeteroParams& params, std::uint64_t stream,
                                             std::size_t& skipped) {
  std::vector<GraphSignature> out;
  skipped = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i].num_edges() == 0) {
      ++skipped;
      continue;
    }
    GraphSignature s;
    s.awe = awe_distribution_auto(graphs[i], params.awe_length, params.walk_budget,
                                  params.walk_samples,
                                  derive_seed(derive_seed(params.seed, stream), i));
    s.hist = feature_sim_histogram(graphs[i], params.bins);
    out.push_back(std::move(s));
  }
  return out;
}

HeterogeneityReport cross_heterogeneity(std::span<const GraphSignature> sa,
                                        std::span<const GraphSignature> sb,
                                        const HeteroParams& params) {
  if (sa.empty() || sb.empty()) throw ArgumentError("cross_heterogeneity: empty set");
  const std::uint64_t total = static_cast<std::uint64_t>(sa.size()) * sb.size();
  std::vector<double> st, ft;
  for (std::uint64_t k : choose_pairs(total, params.pair_budget, derive_seed(params.seed, 7))) {
    const auto& a = sa[k / sb.size()];
    const auto& b = sb[k % sb.size()];
    st.push_back(js_distance(a.awe.probs, b.awe.probs));
    ft.push_back(js_divergence(a.hist.mass, b.hist.mass));
  }
  return summarize(std::move(st), std::move(ft));
}

void write_hetero_csv_header(std::ostream& out) {
  out << "setA,setB,structure_mean,structure_std,feature_mean,feature_std\n";
}

void write_hetero_csv_row(std::ostream& out, const std::string& set_a,
                          const std::string& set_b, const HeterogeneityReport& r) {
  out << std::setprecision(10) << set_a << ',' << set_b << ',' << r.structure_mean << ','
      << r.structure_std << ',' << r.feature_mean << ',' << r.feature_std << '\n';
}

}  // namespace gcfl::hetero
