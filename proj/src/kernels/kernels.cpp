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


#include "gcfl/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

namespace gcfl::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void sub_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

constexpr KernelTable kScalar{Isa::kScalar, dot_scalar, axpy_scalar,
                              sum_squares_scalar, sub_scalar};

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{nullptr};
  return table;
}

const KernelTable* pick_default() {
  const char* env = std::getenv("GCFL_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return &kScalar;
  if (cpu_has_avx2()) {
    if (const KernelTable* t = avx2_table()) return t;
  }
  return &kScalar;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& active() {
  const KernelTable* t = current().load(std::memory_order_acquire);
  if (t == nullptr) {
    t = pick_default();
    current().store(t, std::memory_order_release);
  }
  return *t;
}

bool select(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      current().store(&kScalar, std::memory_order_release);
      return true;
    case Isa::kAvx2:
      if (!cpu_has_avx2() || avx2_table() == nullptr) return false;
      current().store(avx2_table(), std::memory_order_release);
      return true;
  }
  return false;
}

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

double norm2(std::span<const double> x) { return std::sqrt(sum_squares(x)); }

}  // namespace gcfl::kernels
