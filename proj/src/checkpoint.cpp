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


#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "gcfl/gnn.hpp"

namespace gcfl::gnn {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  auto bits = std::bit_cast<std::uint64_t>(value);
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes.data(), 8);
}

template <typename T>
T read_le(std::istream& in) {
  std::array<unsigned char, 8> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw IngestionError("checkpoint truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

void save_checkpoint(std::ostream& out, const GinModel& model) {
  const GinShape& s = model.shape();
  write_le<std::uint64_t>(out, s.input_dim);
  write_le<std::uint64_t>(out, s.hidden);
  write_le<std::uint64_t>(out, s.num_layers);
  write_le<std::uint64_t>(out, s.output_dim);
  for (double x : model.flatten()) write_le<double>(out, x);
}

GinModel load_checkpoint(std::istream& in) {
  GinShape s;
  s.input_dim = read_le<std::uint64_t>(in);
  s.hidden = read_le<std::uint64_t>(in);
  s.num_layers = read_le<std::uint64_t>(in);
  s.output_dim = read_le<std::uint64_t>(in);
  if (s.input_dim == 0 || s.hidden == 0 || s.num_layers == 0 || s.output_dim == 0 ||
      s.input_dim > (1u << 24) || s.hidden > (1u << 16) || s.num_layers > 64 ||
      s.output_dim > (1u << 16)) {
    throw IngestionError("checkpoint header has an invalid shape");
  }
  GinModel model(s);
  for (double& x : model.params()) x = read_le<double>(in);
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const GinModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write checkpoint " + path.string());
  save_checkpoint(out, model);
}

GinModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace gcfl::gnn
