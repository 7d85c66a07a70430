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

#include <span>
#include <vector>

namespace gcfl::stats {

double mean(std::span<const double> xs);
// Population (ddof = 0) standard deviation.
double population_std(std::span<const double> xs);
// Unbiased (ddof = 1) variance; 0 for fewer than two samples.
double sample_variance(std::span<const double> xs);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

// Welch's unequal-variance t-test. Degenerate cases: both variances zero
// gives p = 1 for equal means and p = 0 otherwise.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);
std::vector<double> average_ranks(std::span<const double> x);

}  // namespace gcfl::stats
