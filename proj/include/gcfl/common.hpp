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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcfl {

// Error hierarchy. Every error carries a stable class name so the CLI can
// report "<class>: <message>" and map it to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define GCFL_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                        \
   public:                                                           \
    using Error::Error;                                              \
    const char* kind() const noexcept override { return #Name; }     \
  }

GCFL_DEFINE_ERROR(ArgumentError);
GCFL_DEFINE_ERROR(IngestionError);
GCFL_DEFINE_ERROR(CorruptDatasetError);
GCFL_DEFINE_ERROR(UndefinedStatisticError);
GCFL_DEFINE_ERROR(UndefinedEmbeddingError);
GCFL_DEFINE_ERROR(ConfigError);
GCFL_DEFINE_ERROR(ReportError);

#undef GCFL_DEFINE_ERROR

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }

  bool operator==(const Matrix&) const = default;
};

// Derives an independent 64-bit stream seed from a base seed and a stream
// index (splitmix64 finalizer), so sub-components never share RNG streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void log_warning(const std::string& message);

}  // namespace gcfl
