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

#include <cstddef>
#include <span>
#include <string_view>

// Dense vector kernels behind a runtime-dispatched function table. The scalar
// table is the reference; the AVX2 table must match it exactly for
// element-wise kernels and to a relative 1e-13 for reductions.
namespace gcfl::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // sum_i x[i]^2
  double (*sum_squares)(const double* x, std::size_t n);
  // out[i] = x[i] - y[i]
  void (*sub)(const double* x, const double* y, double* out, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table();

bool cpu_has_avx2();

// Table used by the free functions below. Chosen on first use: AVX2 when the
// CPU supports it, unless GCFL_SIMD=scalar is set in the environment.
const KernelTable& active();
// Overrides the active table (tests, benchmarks). Returns false if the
// requested ISA is unavailable, leaving the selection unchanged.
bool select(Isa isa);
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}
inline void sub(std::span<const double> x, std::span<const double> y,
                std::span<double> out) {
  active().sub(x.data(), y.data(), out.data(), x.size());
}
double norm2(std::span<const double> x);

}  // namespace gcfl::kernels
