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
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include "gcfl/graph.hpp"

namespace gcfl {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<double> parse_reals(const std::string& line, const fs::path& file) {
  std::vector<double> out;
  const char* p = line.c_str();
  while (*p != '\0') {
    while (*p == ' ' || *p == '\t' || *p == ',') ++p;
    if (*p == '\0') break;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(p, &end);
    if (end == p || errno == ERANGE) {
      throw CorruptDatasetError("unparsable value in " + file.filename().string() +
                                ": '" + line + "'");
    }
    out.push_back(v);
    p = end;
  }
  return out;
}

long parse_int(const std::string& line, const fs::path& file) {
  const auto vals = parse_reals(line, file);
  if (vals.empty()) {
    throw CorruptDatasetError("empty record in " + file.filename().string());
  }
  return static_cast<long>(vals.front());
}

fs::path require(const fs::path& root, const std::string& name,
                 const std::string& suffix) {
  fs::path p = root / (name + suffix);
  if (!fs::is_regular_file(p)) {
    throw IngestionError("missing mandatory file: " + p.string());
  }
  return p;
}

std::optional<fs::path> optional_file(const fs::path& root, const std::string& name,
                                      const std::string& suffix) {
  fs::path p = root / (name + suffix);
  if (fs::is_regular_file(p)) return p;
  return std::nullopt;
}

}  // namespace

Dataset load_tu_dataset(const fs::path& root, const std::string& name) {
  // Some distributions nest the files in <root>/<name>/.
  fs::path dir = root;
  if (!fs::is_regular_file(dir / (name + "_A.txt")) &&
      fs::is_regular_file(dir / name / (name + "_A.txt"))) {
    dir = dir / name;
  }
  const fs::path a_path = require(dir, name, "_A.txt");
  const fs::path ind_path = require(dir, name, "_graph_indicator.txt");
  const fs::path lab_path = require(dir, name, "_graph_labels.txt");
  const auto node_lab_path = optional_file(dir, name, "_node_labels.txt");
  const auto attr_path = optional_file(dir, name, "_node_attributes.txt");

  // Node -> graph.
  const auto ind_lines = read_lines(ind_path);
  const std::size_t total_nodes = ind_lines.size();
  std::vector<long> graph_of(total_nodes);
  for (std::size_t i = 0; i < total_nodes; ++i) {
    graph_of[i] = parse_int(ind_lines[i], ind_path);
  }
  std::vector<long> graph_ids(graph_of);
  std::sort(graph_ids.begin(), graph_ids.end());
  graph_ids.erase(std::unique(graph_ids.begin(), graph_ids.end()), graph_ids.end());
  std::map<long, std::size_t> graph_index;
  for (std::size_t g = 0; g < graph_ids.size(); ++g) graph_index[graph_ids[g]] = g;

  const std::size_t num_graphs = graph_ids.size();
  std::vector<int> local_id(total_nodes);
  std::vector<int> graph_size(num_graphs, 0);
  for (std::size_t i = 0; i < total_nodes; ++i) {
    const std::size_t g = graph_index[graph_of[i]];
    local_id[i] = graph_size[g]++;
  }

  // Graph labels, remapped to 0-based contiguous indices.
  const auto lab_lines = read_lines(lab_path);
  if (lab_lines.size() != num_graphs) {
    throw CorruptDatasetError(lab_path.filename().string() + " has " +
                              std::to_string(lab_lines.size()) + " labels for " +
                              std::to_string(num_graphs) + " graphs");
  }
  std::vector<long> raw_labels(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) raw_labels[g] = parse_int(lab_lines[g], lab_path);
  std::vector<long> label_values(raw_labels);
  std::sort(label_values.begin(), label_values.end());
  label_values.erase(std::unique(label_values.begin(), label_values.end()),
                     label_values.end());

  // Node features: attributes first, then one-hot node labels.
  std::vector<std::vector<double>> attrs;
  std::size_t attr_dim = 0;
  if (attr_path) {
    const auto lines = read_lines(*attr_path);
    if (lines.size() != total_nodes) {
      throw CorruptDatasetError(attr_path->filename().string() +
                                " row count does not match node count");
    }
    attrs.reserve(total_nodes);
    for (const auto& l : lines) {
      attrs.push_back(parse_reals(l, *attr_path));
      if (attrs.size() == 1) attr_dim = attrs.back().size();
      if (attrs.back().size() != attr_dim) {
        throw CorruptDatasetError("ragged rows in " + attr_path->filename().string());
      }
    }
  }
  std::vector<long> node_labels;
  std::vector<long> node_label_values;
  if (node_lab_path) {
    const auto lines = read_lines(*node_lab_path);
    if (lines.size() != total_nodes) {
      throw CorruptDatasetError(node_lab_path->filename().string() +
                                " row count does not match node count");
    }
    node_labels.reserve(total_nodes);
    for (const auto& l : lines) node_labels.push_back(parse_int(l, *node_lab_path));
    node_label_values = node_labels;
    std::sort(node_label_values.begin(), node_label_values.end());
    node_label_values.erase(
        std::unique(node_label_values.begin(), node_label_values.end()),
        node_label_values.end());
  }
  std::size_t feat_dim = attr_dim + node_label_values.size();
  const bool constant_features = feat_dim == 0;
  if (constant_features) feat_dim = 1;

  Dataset ds;
  ds.name = name;
  ds.feat_dim = feat_dim;
  ds.num_classes = static_cast<int>(label_values.size());
  ds.graphs.resize(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    Graph& graph = ds.graphs[g];
    graph.num_nodes = graph_size[g];
    graph.label = static_cast<int>(
        std::lower_bound(label_values.begin(), label_values.end(), raw_labels[g]) -
        label_values.begin());
    graph.features = Matrix(static_cast<std::size_t>(graph_size[g]), feat_dim,
                            constant_features ? 1.0 : 0.0);
  }
  if (!constant_features) {
    for (std::size_t i = 0; i < total_nodes; ++i) {
      Graph& graph = ds.graphs[graph_index[graph_of[i]]];
      auto row = graph.features.row(static_cast<std::size_t>(local_id[i]));
      if (!attrs.empty()) std::copy(attrs[i].begin(), attrs[i].end(), row.begin());
      if (!node_labels.empty()) {
        const auto idx = std::lower_bound(node_label_values.begin(),
                                          node_label_values.end(), node_labels[i]) -
                         node_label_values.begin();
        row[attr_dim + static_cast<std::size_t>(idx)] = 1.0;
      }
    }
  }

  // Edges: 1-based global node ids, usually listed in both directions.
  for (const auto& line : read_lines(a_path)) {
    const auto vals = parse_reals(line, a_path);
    if (vals.size() < 2) {
      throw CorruptDatasetError("malformed edge record in " +
                                a_path.filename().string() + ": '" + line + "'");
    }
    const long a = static_cast<long>(vals[0]);
    const long b = static_cast<long>(vals[1]);
    if (a < 1 || b < 1 || static_cast<std::size_t>(a) > total_nodes ||
        static_cast<std::size_t>(b) > total_nodes) {
      throw CorruptDatasetError("node index out of range in " +
                                a_path.filename().string() + ": '" + line + "'");
    }
    if (graph_of[a - 1] != graph_of[b - 1]) {
      throw CorruptDatasetError("edge crosses graphs in " +
                                a_path.filename().string() + ": '" + line + "'");
    }
    int u = local_id[a - 1];
    int v = local_id[b - 1];
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    ds.graphs[graph_index[graph_of[a - 1]]].edges.emplace_back(u, v);
  }
  for (Graph& graph : ds.graphs) {
    auto& e = graph.edges;
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
  }
  if (ds.num_classes < 2) {
    throw CorruptDatasetError(name + " has fewer than two graph classes");
  }
  ds.validate();
  return ds;
}

}  // namespace gcfl
