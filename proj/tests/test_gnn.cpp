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


#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gcfl/gnn.hpp"

using namespace gcfl;
using namespace gcfl::gnn;

namespace {

Graph random_graph(std::mt19937_64& rng, int n, double p, std::size_t feat_dim, int label) {
  std::bernoulli_distribution coin(p);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  Graph g = make_graph(n, e, label);
  g.features = Matrix(static_cast<std::size_t>(n), feat_dim);
  for (auto& x : g.features.data) x = nd(rng);
  return g;
}

// Naive dense forward with an explicit adjacency matrix.
std::vector<double> dense_forward(const GinModel& m, const Graph& g) {
  const auto& s = m.shape();
  const auto& lay = m.layout();
  const auto p = m.flatten();
  const std::size_t n = static_cast<std::size_t>(g.num_nodes);
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (auto [u, v] : g.edges) A[u][v] = A[v][u] = 1.0;
  std::vector<std::vector<double>> h(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto r = g.features.row(v);
    h[v].assign(r.begin(), r.end());
  }
  for (std::size_t l = 0; l < s.num_layers; ++l) {
    const auto& L = lay.layers[l];
    std::vector<std::vector<double>> next(n, std::vector<double>(s.hidden, 0.0));
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<double> z(L.in, 0.0);
      for (std::size_t k = 0; k < L.in; ++k) {
        z[k] = (1.0 + p[L.eps]) * h[v][k];
        for (std::size_t u = 0; u < n; ++u) z[k] += A[v][u] * h[u][k];
      }
      std::vector<double> a(s.hidden);
      for (std::size_t j = 0; j < s.hidden; ++j) {
        double t = p[L.b1 + j];
        for (std::size_t k = 0; k < L.in; ++k) t += z[k] * p[L.w1 + k * s.hidden + j];
        a[j] = t > 0.0 ? t : 0.0;
      }
      for (std::size_t j = 0; j < s.hidden; ++j) {
        double t = p[L.b2 + j];
        for (std::size_t k = 0; k < s.hidden; ++k) t += a[k] * p[L.w2 + k * s.hidden + j];
        next[v][j] = t;
      }
    }
    h = std::move(next);
  }
  std::vector<double> out(s.output_dim);
  for (std::size_t c = 0; c < s.output_dim; ++c) {
    double t = p[lay.bc + c];
    for (std::size_t j = 0; j < s.hidden; ++j) {
      double pooled = 0.0;
      for (std::size_t v = 0; v < n; ++v) pooled += h[v][j];
      t += pooled * p[lay.wc + j * s.output_dim + c];
    }
    out[c] = t;
  }
  return out;
}

double batch_loss(const GinModel& m, std::span<const Graph> batch) {
  double s = 0.0;
  for (const auto& g : batch) s += cross_entropy(gin_forward(m, g), g.label);
  return s / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("GIN parameter layout") {
  GinShape s{3, 5, 2, 4};
  GinLayout lay(s);
  CHECK(lay.total == s.param_count());
  CHECK(s.param_count() == (1 + 15 + 5 + 25 + 5) + (1 + 25 + 5 + 25 + 5) + 20 + 4);
  CHECK(lay.layers[1].in == 5);
  CHECK_THROWS_AS(GinModel(GinShape{0, 5, 2, 4}), ArgumentError);
  GinModel m = GinModel::initialized(s, 3);
  CHECK(m.flatten()[lay.layers[0].eps] == 0.0);
  for (std::size_t i = 0; i < 15; ++i) {
    CHECK(std::fabs(m.flatten()[lay.layers[0].w1 + i]) <= 1.0 / std::sqrt(3.0));
  }
  CHECK(GinModel::initialized(s, 3).flatten()[7] == m.flatten()[7]);
  std::vector<double> bad(3);
  CHECK_THROWS_AS(m.unflatten(bad), ArgumentError);
}

TEST_CASE("GIN forward") {
  std::mt19937_64 rng(5);
  GinShape s{3, 6, 3, 2};
  SUBCASE("zero parameters give uniform loss") {
    GinModel m(GinShape{3, 6, 3, 4});
    Graph g = random_graph(rng, 6, 0.5, 3, 1);
    CHECK(cross_entropy(gin_forward(m, g), 1) == doctest::Approx(std::log(4.0)));
  }
  SUBCASE("matches dense oracle") {
    for (int t = 0; t < 10; ++t) {
      GinModel m = GinModel::initialized(s, 100 + t);
      m.params()[m.layout().layers[1].eps] = 0.3;
      Graph g = random_graph(rng, 5 + t, 0.4, 3, 0);
      auto a = gin_forward(m, g);
      auto b = dense_forward(m, g);
      for (std::size_t c = 0; c < a.size(); ++c) {
        CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("node permutation invariance") {
    GinModel m = GinModel::initialized(s, 7);
    Graph g = random_graph(rng, 9, 0.4, 3, 0);
    std::vector<int> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<int, int>> e;
    for (auto [u, v] : g.edges) e.emplace_back(perm[u], perm[v]);
    Graph h = make_graph(9, e);
    h.features = Matrix(9, 3);
    for (int v = 0; v < 9; ++v)
      for (int k = 0; k < 3; ++k) h.features(perm[v], k) = g.features(v, k);
    auto a = gin_forward(m, g), b = gin_forward(m, h);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
  }
  SUBCASE("feature dimension mismatch") {
    GinModel m(s);
    CHECK_THROWS_AS(gin_forward(m, random_graph(rng, 4, 0.5, 2, 0)), ArgumentError);
  }
}

TEST_CASE("cross entropy") {
  std::vector<double> big{1000.0, 0.0};
  CHECK(cross_entropy(big, 0) == doctest::Approx(0.0));
  CHECK(cross_entropy(big, 1) == doctest::Approx(1000.0));
  CHECK(std::isfinite(cross_entropy(big, 1)));
  std::vector<double> z{0.3, -1.2, 2.5, 0.0};
  long double s = 0.0L;
  for (double x : z) s += std::exp(static_cast<long double>(x));
  const double oracle = static_cast<double>(std::log(s) - 2.5L);
  CHECK(std::fabs(cross_entropy(z, 2) - oracle) < 1e-12);
  CHECK_THROWS_AS(cross_entropy(z, 4), ArgumentError);
  CHECK_THROWS_AS(cross_entropy(z, -1), ArgumentError);
}

TEST_CASE("GIN gradients match central finite differences") {
  std::mt19937_64 rng(17);
  GinShape s{3, 5, 3, 3};
  GinModel m = GinModel::initialized(s, 23);
  m.params()[m.layout().layers[0].eps] = 0.1;
  m.params()[m.layout().layers[2].eps] = -0.2;
  std::vector<Graph> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_graph(rng, 6, 0.4, 3, i % 3));
  const LossGrad lg = gin_backward(m, std::span<const Graph>(batch));
  CHECK(lg.loss == doctest::Approx(batch_loss(m, batch)).epsilon(1e-12));
  const double h = 1e-5;
  int checked = 0;
  for (std::size_t i = 0; i < m.flatten().size(); ++i) {
    const double orig = m.flatten()[i];
    m.params()[i] = orig + h;
    const double up = batch_loss(m, batch);
    m.params()[i] = orig - h;
    const double down = batch_loss(m, batch);
    m.params()[i] = orig;
    const double fd = (up - down) / (2 * h);
    const double denom = std::max({std::fabs(fd), std::fabs(lg.grad[i]), 1e-8});
    const double rel = std::fabs(fd - lg.grad[i]) / denom;
    if (std::fabs(fd - lg.grad[i]) > 1e-8) CHECK(rel < 1e-4);
    ++checked;
  }
  CHECK(checked == static_cast<int>(s.param_count()));
}

TEST_CASE("batch gradient is a mean") {
  std::mt19937_64 rng(3);
  GinModel m = GinModel::initialized(GinShape{2, 4, 2, 2}, 1);
  std::vector<Graph> one{random_graph(rng, 5, 0.5, 2, 1)};
  std::vector<Graph> two{one[0], one[0]};
  auto a = gin_backward(m, std::span<const Graph>(one));
  auto b = gin_backward(m, std::span<const Graph>(two));
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-14));
  for (std::size_t i = 0; i < a.grad.size(); ++i) {
    CHECK(a.grad[i] == doctest::Approx(b.grad[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gin_backward(m, std::span<const Graph>()), ArgumentError);
}

TEST_CASE("Adam") {
  SUBCASE("zero gradient without weight decay is a no-op") {
    std::vector<double> p{1.0, -2.0}, g{0.0, 0.0};
    AdamState st(2, AdamConfig{0.1, 0.9, 0.999, 1e-8, 0.0});
    adam_step(st, p, g);
    CHECK(p == std::vector<double>{1.0, -2.0});
  }
  SUBCASE("first step moves by lr against the gradient sign") {
    std::vector<double> p{1.0, -2.0, 0.5}, g{3.0, -0.25, 1e3};
    AdamState st(3, AdamConfig{0.01, 0.9, 0.999, 1e-12, 0.0});
    adam_step(st, p, g);
    CHECK(p[0] == doctest::Approx(0.99).epsilon(1e-10));
    CHECK(p[1] == doctest::Approx(-1.99).epsilon(1e-10));
    CHECK(p[2] == doctest::Approx(0.49).epsilon(1e-10));
  }
  SUBCASE("matches a torch.optim.Adam transcript") {
    // torch.optim.Adam(lr=0.01, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.1),
    // 10 steps, grad_i = sin(1 + t + i) * (i + 1) + 0.3 * p_i^3 at step t.
    std::vector<double> p{0.5, -1.25, 2.0, 0.0, -0.75};
    AdamState st(5, AdamConfig{0.01, 0.9, 0.999, 1e-8, 0.1});
    for (int t = 0; t < 10; ++t) {
      std::vector<double> g(5);
      for (int i = 0; i < 5; ++i) {
        g[i] = std::sin(1.0 + t + i) * (i + 1) + 0.3 * p[i] * p[i] * p[i];
      }
      adam_step(st, p, g);
    }
    const std::vector<double> expect{0.4561438797105705, -1.2257029523346672,
                                     1.9251144645309917, 0.0384169058322268,
                                     -0.7271654177563195};
    for (int i = 0; i < 5; ++i) CHECK(std::fabs(p[i] - expect[i]) < 1e-10);
    CHECK(st.step == 10);
  }
  SUBCASE("length mismatch") {
    std::vector<double> p{1.0}, g{1.0, 2.0};
    AdamState st(1, AdamConfig{});
    CHECK_THROWS_AS(adam_step(st, p, g), ArgumentError);
  }
}

TEST_CASE("GIN learns a separable toy task") {
  // Class 0: paths, class 1: cliques; one constant feature.
  std::vector<Graph> data;
  for (int i = 0; i < 10; ++i) {
    const int n = 4 + i % 4;
    std::vector<std::pair<int, int>> path, clique;
    for (int v = 0; v + 1 < n; ++v) path.emplace_back(v, v + 1);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) clique.emplace_back(a, b);
    data.push_back(make_graph(n, path, 0));
    data.push_back(make_graph(n, clique, 1));
  }
  GinModel m = GinModel::initialized(GinShape{1, 16, 3, 2}, 11);
  AdamState st(m.flatten().size(), AdamConfig{0.01, 0.9, 0.999, 1e-8, 5e-4});
  const double initial = batch_loss(m, data);
  for (int epoch = 0; epoch < 200; ++epoch) {
    auto lg = gin_backward(m, std::span<const Graph>(data));
    adam_step(st, m.params(), lg.grad);
  }
  int correct = 0;
  for (const auto& g : data) {
    auto z = gin_forward(m, g);
    correct += (z[1] > z[0]) == (g.label == 1);
  }
  CHECK(batch_loss(m, data) < initial);
  CHECK(correct == 20);
}

TEST_CASE("one-hot degree features") {
  Graph star = make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  Graph f = one_hot_degree_features(star, 2);
  CHECK(f.feat_dim() == 3);
  CHECK(f.features(0, 2) == 1.0);  // degree 4 clamped
  CHECK(f.features(1, 1) == 1.0);
  CHECK(f.features(1, 0) == 0.0);
  Graph iso = one_hot_degree_features(make_graph(2, {}), 3);
  CHECK(iso.features(0, 0) == 1.0);
  CHECK_THROWS_AS(one_hot_degree_features(star, 0), ArgumentError);
}

TEST_CASE("checkpoint round trip") {
  GinModel m = GinModel::initialized(GinShape{4, 7, 2, 3}, 99);
  std::stringstream ss;
  save_checkpoint(ss, m);
  CHECK(ss.str().size() == 32 + 8 * m.flatten().size());
  GinModel r = load_checkpoint(ss);
  CHECK(r.shape() == m.shape());
  CHECK(std::equal(r.flatten().begin(), r.flatten().end(), m.flatten().begin()));
  std::stringstream truncated(ss.str().substr(0, 40));
  CHECK_THROWS(load_checkpoint(truncated));
}

TEST_CASE("SGC") {
  std::mt19937_64 rng(41);
  SUBCASE("normalized adjacency") {
    Matrix L = normalized_adjacency(2, {{0, 1}});
    CHECK(L(0, 0) == doctest::Approx(0.5));
    CHECK(L(0, 1) == doctest::Approx(0.5));
    Matrix I = normalized_adjacency(3, {});
    CHECK(I(1, 1) == 1.0);
    CHECK(I(0, 1) == 0.0);
    Graph g = random_graph(rng, 8, 0.4, 2, 0);
    Matrix S = normalized_adjacency(g);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) CHECK(S(i, j) == doctest::Approx(S(j, i)));
  }
  SUBCASE("zero hops is plain softmax regression") {
    Graph g = random_graph(rng, 12, 0.3, 4, 0);
    std::vector<int> labels(12);
    for (int v = 0; v < 12; ++v) labels[v] = v % 3;
    SgcTrainConfig cfg{0, 50, 0.5, 7};
    SgcModel model = sgc_train(g, labels, cfg, 3);
    Matrix direct = softmax_regression(g.features, labels, 3, 50, 0.5, 7);
    CHECK(model.theta == direct);
    CHECK(sgc_train(g, labels, cfg, 3).theta == model.theta);
  }
  SUBCASE("training lowers the loss") {
    Graph g = random_graph(rng, 15, 0.3, 4, 0);
    std::vector<int> labels(15);
    for (int v = 0; v < 15; ++v) labels[v] = g.features(v, 0) > 0.0 ? 1 : 0;
    std::vector<double> trace;
    sgc_train(g, labels, SgcTrainConfig{2, 100, 0.5, 1}, 2, &trace);
    REQUIRE(trace.size() >= 2);
    CHECK(trace.back() < trace.front());
  }
  SUBCASE("propagation with K hops equals repeated multiplication") {
    Graph g = random_graph(rng, 6, 0.5, 2, 0);
    Matrix L = normalized_adjacency(g);
    Matrix two = propagate(L, propagate(L, g.features, 1), 1);
    Matrix direct = propagate(L, g.features, 2);
    for (std::size_t k = 0; k < two.data.size(); ++k) {
      CHECK(two.data[k] == doctest::Approx(direct.data[k]).epsilon(1e-13));
    }
  }
  SUBCASE("sensitivity series are deterministic") {
    SensitivityConfig cfg;
    cfg.levels = 6;
    auto a = sgc_structure_sensitivity(cfg, 3);
    auto b = sgc_structure_sensitivity(cfg, 3);
    CHECK(a.input_change.size() == 6);
    CHECK(a.weight_change == b.weight_change);
    CHECK(std::is_sorted(a.input_change.begin(), a.input_change.end()));
    auto f = sgc_feature_sensitivity(cfg, 3);
    CHECK(std::is_sorted(f.input_change.begin(), f.input_change.end()));
  }
}
