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
#include <random>

#include "gcfl/gnn.hpp"
#include "gcfl/kernels.hpp"

namespace gcfl::gnn {
namespace {

// c = a * b, with b a flat (a.cols x m) row-major block.
void matmul(const Matrix& a, const double* b, std::size_t m, Matrix& c) {
  c = Matrix(a.rows, m);
  for (std::size_t i = 0; i < a.rows; ++i) {
    auto out = c.row(i);
    for (std::size_t p = 0; p < a.cols; ++p) {
      const double s = a(i, p);
      if (s != 0.0) kernels::axpy(s, {b + p * m, m}, out);
    }
  }
}

void add_bias(Matrix& c, const double* bias) {
  for (std::size_t i = 0; i < c.rows; ++i) {
    kernels::axpy(1.0, {bias, c.cols}, c.row(i));
  }
}

// grad (a.cols x b.cols, flat) += a^T b
void accumulate_at_b(const Matrix& a, const Matrix& b, double* grad) {
  for (std::size_t v = 0; v < a.rows; ++v) {
    const auto brow = b.row(v);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double s = a(v, i);
      if (s != 0.0) kernels::axpy(s, brow, {grad + i * b.cols, b.cols});
    }
  }
}

// c = a * w^T with w a flat (k x a.cols) block; c is a.rows x k.
void matmul_bt(const Matrix& a, const double* w, std::size_t k, Matrix& c) {
  c = Matrix(a.rows, k);
  for (std::size_t v = 0; v < a.rows; ++v) {
    const auto arow = a.row(v);
    for (std::size_t i = 0; i < k; ++i) {
      c(v, i) = kernels::dot(arow, {w + i * a.cols, a.cols});
    }
  }
}

void sum_rows_into(const Matrix& a, double* out) {
  for (std::size_t v = 0; v < a.rows; ++v) kernels::axpy(1.0, a.row(v), {out, a.cols});
}

// z = (1 + eps) h + A h
Matrix aggregate(const Matrix& h, const Adjacency& adj, double eps) {
  Matrix z(h.rows, h.cols);
  const int n = static_cast<int>(h.rows);
  for (int v = 0; v < n; ++v) {
    auto out = z.row(v);
    kernels::axpy(1.0 + eps, h.row(v), out);
    for (int u : adj.neighbors(v)) kernels::axpy(1.0, h.row(u), out);
  }
  return z;
}

struct ForwardCache {
  Adjacency adj;
  std::vector<Matrix> h;  // h[0] = input features, h[l+1] = layer l output
  std::vector<Matrix> z, u, r;
  std::vector<double> pooled;
  std::vector<double> logits;
};

void forward(const GinModel& model, const Graph& graph, ForwardCache& cache) {
  const GinShape& shape = model.shape();
  if (graph.feat_dim() != shape.input_dim) {
    throw ArgumentError("gin_forward: graph feature dimension " +
                        std::to_string(graph.feat_dim()) + " != model input_dim " +
                        std::to_string(shape.input_dim));
  }
  const auto& lay = model.layout();
  const double* p = model.flatten().data();
  cache.adj = build_adjacency(graph);
  cache.h.assign(1, graph.features);
  cache.z.clear();
  cache.u.clear();
  cache.r.clear();
  for (std::size_t l = 0; l < shape.num_layers; ++l) {
    const auto& L = lay.layers[l];
    cache.z.push_back(aggregate(cache.h.back(), cache.adj, p[L.eps]));
    Matrix u;
    matmul(cache.z.back(), p + L.w1, shape.hidden, u);
    add_bias(u, p + L.b1);
    Matrix r = u;
    for (double& x : r.data) x = std::max(x, 0.0);
    Matrix next;
    matmul(r, p + L.w2, shape.hidden, next);
    add_bias(next, p + L.b2);
    cache.u.push_back(std::move(u));
    cache.r.push_back(std::move(r));
    cache.h.push_back(std::move(next));
  }
  const Matrix& last = cache.h.back();
  cache.pooled.assign(shape.hidden, 0.0);
  sum_rows_into(last, cache.pooled.data());
  cache.logits.assign(p + lay.bc, p + lay.bc + shape.output_dim);
  for (std::size_t j = 0; j < shape.hidden; ++j) {
    kernels::axpy(cache.pooled[j], {p + lay.wc + j * shape.output_dim, shape.output_dim},
                  cache.logits);
  }
}

void backward(const GinModel& model, const ForwardCache& cache,
              std::span<const double> dlogits, std::span<double> grad) {
  const GinShape& shape = model.shape();
  const auto& lay = model.layout();
  const double* p = model.flatten().data();
  double* g = grad.data();
  const std::size_t hid = shape.hidden;
  const std::size_t out = shape.output_dim;

  kernels::axpy(1.0, dlogits, {g + lay.bc, out});
  std::vector<double> dpooled(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    kernels::axpy(cache.pooled[j], dlogits, {g + lay.wc + j * out, out});
    dpooled[j] = kernels::dot({p + lay.wc + j * out, out}, dlogits);
  }
  Matrix dh(cache.h.back().rows, hid);
  for (std::size_t v = 0; v < dh.rows; ++v) {
    std::copy(dpooled.begin(), dpooled.end(), dh.row(v).begin());
  }

  for (std::size_t l = shape.num_layers; l-- > 0;) {
    const auto& L = lay.layers[l];
    const Matrix& h = cache.h[l];
    const Matrix& z = cache.z[l];
    const Matrix& u = cache.u[l];
    const Matrix& r = cache.r[l];

    accumulate_at_b(r, dh, g + L.w2);
    sum_rows_into(dh, g + L.b2);
    Matrix du;
    matmul_bt(dh, p + L.w2, hid, du);
    for (std::size_t k = 0; k < du.data.size(); ++k) {
      if (!(u.data[k] > 0.0)) du.data[k] = 0.0;
    }
    accumulate_at_b(z, du, g + L.w1);
    sum_rows_into(du, g + L.b1);
    Matrix dz;
    matmul_bt(du, p + L.w1, L.in, dz);
    double deps = 0.0;
    for (std::size_t v = 0; v < dz.rows; ++v) deps += kernels::dot(h.row(v), dz.row(v));
    g[L.eps] += deps;
    if (l > 0) dh = aggregate(dz, cache.adj, p[L.eps]);
  }
}

}  // namespace

std::size_t GinShape::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t in = layer_input(l);
    n += 1 + in * hidden + hidden + hidden * hidden + hidden;
  }
  return n + hidden * output_dim + output_dim;
}

GinLayout::GinLayout(const GinShape& shape) {
  std::size_t off = 0;
  for (std::size_t l = 0; l < shape.num_layers; ++l) {
    Layer L;
    L.in = shape.layer_input(l);
    L.eps = off;
    off += 1;
    L.w1 = off;
    off += L.in * shape.hidden;
    L.b1 = off;
    off += shape.hidden;
    L.w2 = off;
    off += shape.hidden * shape.hidden;
    L.b2 = off;
    off += shape.hidden;
    layers.push_back(L);
  }
  wc = off;
  off += shape.hidden * shape.output_dim;
  bc = off;
  off += shape.output_dim;
  total = off;
}

GinModel::GinModel(const GinShape& shape)
    : shape_(shape), layout_(shape), params_(layout_.total, 0.0) {
  if (shape.input_dim == 0 || shape.hidden == 0 || shape.num_layers == 0 ||
      shape.output_dim == 0) {
    throw ArgumentError("GIN shape dimensions must be positive");
  }
}

GinModel GinModel::initialized(const GinShape& shape, std::uint64_t seed) {
  GinModel model(shape);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < count; ++i) model.params_[offset + i] = dist(rng);
  };
  const auto& lay = model.layout_;
  for (const auto& L : lay.layers) {
    fill(L.w1, L.in * shape.hidden, L.in);
    fill(L.b1, shape.hidden, L.in);
    fill(L.w2, shape.hidden * shape.hidden, shape.hidden);
    fill(L.b2, shape.hidden, shape.hidden);
  }
  fill(lay.wc, shape.hidden * shape.output_dim, shape.hidden);
  fill(lay.bc, shape.output_dim, shape.hidden);
  return model;
}

void GinModel::unflatten(std::span<const double> flat) {
  if (flat.size() != params_.size()) {
    throw ArgumentError("unflatten: expected " + std::to_string(params_.size()) +
                        " parameters, got " + std::to_string(flat.size()));
  }
  std::copy(flat.begin(), flat.end(), params_.begin());
}

std::vector<double> gin_forward(const GinModel& model, const Graph& graph) {
  ForwardCache cache;
  forward(model, graph, cache);
  return cache.logits;
}

double cross_entropy(std::span<const double> logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw ArgumentError("cross_entropy: label out of range");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  return std::log(s) + mx - logits[label];
}

LossGrad gin_backward(const GinModel& model, std::span<const Graph* const> batch) {
  if (batch.empty()) throw ArgumentError("gin_backward: empty batch");
  LossGrad out;
  out.grad.assign(model.flatten().size(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  ForwardCache cache;
  std::vector<double> dlogits;
  for (const Graph* g : batch) {
    forward(model, *g, cache);
    out.loss += cross_entropy(cache.logits, g->label);
    const double mx = *std::max_element(cache.logits.begin(), cache.logits.end());
    dlogits.resize(cache.logits.size());
    double s = 0.0;
    for (std::size_t c = 0; c < dlogits.size(); ++c) {
      dlogits[c] = std::exp(cache.logits[c] - mx);
      s += dlogits[c];
    }
    for (std::size_t c = 0; c < dlogits.size(); ++c) {
      dlogits[c] = (dlogits[c] / s - (static_cast<int>(c) == g->label ? 1.0 : 0.0)) * scale;
    }
    backward(model, cache, dlogits, out.grad);
  }
  out.loss *= scale;
  return out;
}

LossGrad gin_backward(const GinModel& model, std::span<const Graph> batch) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(batch.size());
  for (const Graph& g : batch) ptrs.push_back(&g);
  return gin_backward(model, std::span<const Graph* const>(ptrs));
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ArgumentError("adam_step: length mismatch");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i] + c.weight_decay * params[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

Graph one_hot_degree_features(const Graph& graph, int max_degree) {
  if (max_degree < 1) throw ArgumentError("one_hot_degree_features: max_degree < 1");
  Graph out = graph;
  const auto deg = degrees(graph);
  out.features = Matrix(static_cast<std::size_t>(graph.num_nodes),
                        static_cast<std::size_t>(max_degree) + 1, 0.0);
  for (int v = 0; v < graph.num_nodes; ++v) {
    out.features(v, static_cast<std::size_t>(std::min(deg[v], max_degree))) = 1.0;
  }
  return out;
}

}  // namespace gcfl::gnn
