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
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "gcfl/graph.hpp"

// Structure and feature heterogeneity between graphs: anonymous walk
// distributions compared with Jensen-Shannon distance, and histograms of
// linked-node feature similarity compared with Jensen-Shannon divergence.
namespace gcfl::hetero {

using WalkPattern = std::vector<int>;

// Canonical anonymous walks with `length` steps, in lexicographic order.
std::vector<WalkPattern> enumerate_anonymous_walks(int length);

struct ExactWalks {};
struct SampledWalks {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};
using WalkMode = std::variant<ExactWalks, SampledWalks>;

struct AweDistribution {
  int walk_length = 0;
  std::vector<double> probs;  // indexed like enumerate_anonymous_walks(walk_length)
};

AweDistribution awe_distribution(const Graph& g, int length, const WalkMode& mode);

// Number of `length`-step walks started from non-isolated nodes.
double count_walks(const Graph& g, int length);

// Exact when count_walks(g, length) <= walk_budget, otherwise sampled.
AweDistribution awe_distribution_auto(const Graph& g, int length, double walk_budget,
                                      std::size_t samples, std::uint64_t seed);

// Base-2 Jensen-Shannon divergence in [0, 1]; js_distance is its square root.
double js_divergence(std::span<const double> p, std::span<const double> q);
double js_distance(std::span<const double> p, std::span<const double> q);

struct FeatureSimHistogram {
  int bins = 0;
  std::vector<double> edges;  // bins + 1 boundaries from -1 to 1
  std::vector<double> mass;
};

// Cosine similarity of the endpoint features of each edge; zero vectors give 0.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
FeatureSimHistogram feature_sim_histogram(const Graph& g, int bins);
int similarity_bin(double s, int bins);

struct HeteroParams {
  int awe_length = 4;
  int bins = 20;
  std::size_t pair_budget = 2000;
  std::uint64_t seed = 0;
  double walk_budget = 2e6;
  std::size_t walk_samples = 20000;
};

struct HeterogeneityReport {
  double structure_mean = 0.0;
  double structure_std = 0.0;
  double feature_mean = 0.0;
  double feature_std = 0.0;
  std::size_t pairs = 0;
};

// Mean/std of pairwise structure and feature heterogeneity across setA x setB.
// When both arguments are the same dataset (same object, or same nonempty
// name) only unordered distinct pairs are used. Edgeless graphs are skipped;
// more than half skipped in either set raises ReportError.
HeterogeneityReport pairwise_heterogeneity(const Dataset& set_a, const Dataset& set_b,
                                           const HeteroParams& params);
HeterogeneityReport pairwise_heterogeneity_within(std::span<const Graph> graphs,
                                                  const HeteroParams& params);

// Per-graph AWE distribution and feature-similarity histogram. Edgeless
// graphs are left out and counted in `skipped`.
struct GraphSignature {
  AweDistribution awe;
  FeatureSimHistogram hist;
};
std::vector<GraphSignature> graph_signatures(std::span<const Graph> graphs,
                                             const HeteroParams& params, std::uint64_t stream,
                                             std::size_t& skipped);
// Same as the cross-set case of pairwise_heterogeneity, on precomputed signatures.
HeterogeneityReport cross_heterogeneity(std::span<const GraphSignature> a,
                                        std::span<const GraphSignature> b,
                                        const HeteroParams& params);

void write_hetero_csv_header(std::ostream& out);
void write_hetero_csv_row(std::ostream& out, const std::string& set_a,
                          const std::string& set_b, const HeterogeneityReport& r);

}  // namespace gcfl::hetero
