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
#include <numeric>

#include "gcfl/fed.hpp"
#include "gcfl/kernels.hpp"

namespace gcfl {

void reset_training_state(ClientState& c, const gnn::GinShape& shape,
                          const gnn::AdamConfig& adam, std::uint64_t run_seed) {
  c.params = gnn::GinModel(shape);
  c.optimizer = gnn::AdamState(c.params.flatten().size(), adam);
  c.last_delta.assign(c.params.flatten().size(), 0.0);
  c.rng.seed(derive_seed(run_seed, 0x1000 + static_cast<std::uint64_t>(c.id)));
}

ClientState make_client(int id, std::vector<Graph> train, std::vector<Graph> test,
                        const gnn::GinShape& shape, const gnn::AdamConfig& adam,
                        std::uint64_t run_seed) {
  ClientState c;
  c.id = id;
  c.train_graphs = std::move(train);
  c.test_graphs = std::move(test);
  reset_training_state(c, shape, adam, run_seed);
  return c;
}

gnn::LossGrad prox_objective(const gnn::GinModel& model, std::span<const Graph* const> batch,
                             const Prox& prox) {
  gnn::LossGrad lg = gnn::gin_backward(model, batch);
  const auto theta = model.flatten();
  if (prox.anchor.size() != theta.size()) {
    throw ArgumentError("prox_objective: anchor length mismatch");
  }
  std::vector<double> diff(theta.size());
  kernels::sub(theta, prox.anchor, diff);
  lg.loss += 0.5 * prox.mu * kernels::sum_squares(diff);
  kernels::axpy(prox.mu, diff, lg.grad);
  return lg;
}

std::optional<LocalResult> local_train(ClientState& client, std::span<const double> start_params,
                                       int epochs, std::size_t batch_size,
                                       const std::optional<Prox>& prox) {
  if (client.train_graphs.empty()) return std::nullopt;
  if (batch_size == 0) throw ArgumentError("local_train: batch size must be positive");
  if (epochs < 0) throw ArgumentError("local_train: negative epoch count");
  client.params.unflatten(start_params);
  LocalResult out;
  std::vector<std::size_t> order(client.train_graphs.size());
  std::vector<const Graph*> batch;
  for (int e = 0; e < epochs; ++e) {
    // each epoch permutes the identity, so epochs split across calls match
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), client.rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += batch_size) {
      const std::size_t hi = std::min(order.size(), lo + batch_size);
      batch.clear();
      for (std::size_t k = lo; k < hi; ++k) batch.push_back(&client.train_graphs[order[k]]);
      gnn::LossGrad lg = prox ? prox_objective(client.params, batch, *prox)
                              : gnn::gin_backward(client.params, batch);
      if (prox) {
        // report the data term only
        std::vector<double> diff(start_params.size());
        kernels::sub(client.params.flatten(), prox->anchor, diff);
        loss_sum += lg.loss - 0.5 * prox->mu * kernels::sum_squares(diff);
      } else {
        loss_sum += lg.loss;
      }
      ++batches;
      gnn::adam_step(client.optimizer, client.params.params(), lg.grad);
    }
    out.train_loss = loss_sum / static_cast<double>(batches);
  }
  out.delta.resize(start_params.size());
  kernels::sub(client.params.flatten(), start_params, out.delta);
  client.last_delta = out.delta;
  return out;
}

std::vector<double> fedavg_aggregate(std::span<const std::vector<double>> deltas,
                                     std::span<const std::size_t> sizes,
                                     std::span<const double> base) {
  if (deltas.empty()) throw ArgumentError("fedavg_aggregate: no updates");
  if (deltas.size() != sizes.size()) throw ArgumentError("fedavg_aggregate: length mismatch");
  double total = 0.0;
  for (auto s : sizes) total += static_cast<double>(s);
  if (!(total > 0.0)) throw ArgumentError("fedavg_aggregate: total size is zero");
  std::vector<double> step(base.size(), 0.0);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i].size() != base.size()) {
      throw ArgumentError("fedavg_aggregate: delta length mismatch");
    }
    const double w = static_cast<double>(sizes[i]) / total;
    weight_sum += w;
    kernels::axpy(w, deltas[i], step);
  }
  if (std::fabs(weight_sum - 1.0) > 1e-9) {
    throw ArgumentError("fedavg_aggregate: weights do not sum to 1");
  }
  std::vector<double> out(base.begin(), base.end());
  kernels::axpy(1.0, step, out);
  return out;
}

Evaluation evaluate(const gnn::GinModel& model, std::span<const Graph> graphs) {
  Evaluation ev;
  if (graphs.empty()) return ev;
  std::size_t correct = 0;
  for (const auto& g : graphs) {
    const auto z = gnn::gin_forward(model, g);
    ev.loss += gnn::cross_entropy(z, g.label);
    const auto pred = std::max_element(z.begin(), z.end()) - z.begin();
    correct += pred == g.label;
  }
  ev.loss /= static_cast<double>(graphs.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(graphs.size());
  return ev;
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kSelfTrain: return "selftrain";
    case Algorithm::kFedAvg: return "fedavg";
    case Algorithm::kFedProx: return "fedprox";
    case Algorithm::kGcfl: return "gcfl";
    case Algorithm::kGcflPlus: return "gcflplus";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kSelfTrain, Algorithm::kFedAvg, Algorithm::kFedProx,
                      Algorithm::kGcfl, Algorithm::kGcflPlus}) {
    if (algorithm_name(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

FederationResult run_federation(std::vector<ClientState>& clients, Algorithm algorithm,
                                const FedConfig& config, const RoundObserver& observer) {
  if (clients.empty()) throw ArgumentError("run_federation: no clients");
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i].id != static_cast<int>(i)) {
      throw ArgumentError("run_federation: client ids must be 0..n-1 in order");
    }
  }
  const bool clustered = algorithm == Algorithm::kGcfl || algorithm == Algorithm::kGcflPlus;
  if (clustered && config.clustering) config.cluster.validate();

  const gnn::GinModel init = gnn::GinModel::initialized(config.shape, config.seed);
  const std::vector<double> theta0(init.flatten().begin(), init.flatten().end());
  const std::size_t n = clients.size();

  FederationResult result;
  int next_id = 0;
  if (algorithm == Algorithm::kSelfTrain) {
    for (std::size_t i = 0; i < n; ++i) {
      result.clusters.push_back({next_id++, {static_cast<int>(i)}, theta0, 0.0, 0.0});
    }
  } else {
    ClusterState all{next_id++, {}, theta0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) all.members.push_back(static_cast<int>(i));
    result.clusters.push_back(std::move(all));
  }
  NormWindow window(n, config.window);

  std::vector<LocalResult> local(n);
  std::vector<std::size_t> sizes(n);
  for (int t = 1; t <= config.rounds; ++t) {
    // local training from each client's cluster model
    for (const auto& cl : result.clusters) {
      for (int c : cl.members) {
        std::optional<Prox> prox;
        if (algorithm == Algorithm::kFedProx) prox = Prox{config.mu, cl.model};
        auto r = local_train(clients[c], cl.model, config.local_epochs, config.batch_size, prox);
        if (r) {
          local[c] = std::move(*r);
          sizes[c] = clients[c].data_size();
        } else {
          log_warning("client " + std::to_string(c) + " has no training graphs; skipped");
          local[c] = LocalResult{std::vector<double>(theta0.size(), 0.0), 0.0};
          sizes[c] = 0;
        }
      }
    }
    std::vector<double> norms(n);
    for (std::size_t c = 0; c < n; ++c) norms[c] = kernels::norm2(local[c].delta);
    if (algorithm == Algorithm::kGcflPlus) window.push(norms);

    // split checks, then cluster-wise aggregation
    std::vector<ClusterState> next;
    std::vector<double> round_mean, round_max;
    for (auto& cl : result.clusters) {
      std::vector<std::vector<double>> deltas;
      std::vector<std::size_t> sz;
      for (int c : cl.members) {
        deltas.push_back(local[c].delta);
        sz.push_back(sizes[c]);
      }
      if (clustered) {
        const SplitDecision d = split_check(deltas, sz, config.cluster, t);
        cl.delta_mean = d.delta_mean;
        cl.delta_max = d.delta_max;
        round_mean.push_back(d.delta_mean);
        round_max.push_back(d.delta_max);
        if (config.clustering && d.should_split) {
          Matrix w = algorithm == Algorithm::kGcfl
                         ? to_cut_weights(cosine_matrix(deltas))
                         : dtw_to_cut_weights(dtw_matrix(window, cl.members, config.standardize));
          if (auto bp = bipartition_cluster(cl, w, next_id)) {
            next_id += 2;
            SplitEvent ev{t, cl.id, bp->first.id, bp->second.id, bp->first.members,
                          bp->second.members, d.delta_mean, d.delta_max, bp->cut_value, {}};
            if (algorithm == Algorithm::kGcflPlus) {
              for (int c : cl.members) ev.norm_windows.emplace_back(c, window.sequence(c));
            }
            result.splits.push_back(std::move(ev));
            next.push_back(std::move(bp->first));
            next.push_back(std::move(bp->second));
            continue;
          }
        }
      }
      next.push_back(std::move(cl));
    }
    for (auto& cl : next) {
      std::vector<std::vector<double>> deltas;
      std::vector<std::size_t> sz;
      std::size_t total = 0;
      for (int c : cl.members) {
        deltas.push_back(local[c].delta);
        sz.push_back(sizes[c]);
        total += sizes[c];
      }
      if (total == 0) continue;
      if (cl.members.size() == 1) {
        // theta + (theta_hat - theta) is theta_hat up to rounding; keep it exact
        const auto p = clients[cl.members[0]].params.flatten();
        cl.model.assign(p.begin(), p.end());
      } else {
        cluster_aggregate(cl, deltas, sz);
      }
    }
    result.clusters = std::move(next);

    RoundReport rep;
    rep.round = t;
    rep.delta_mean = std::move(round_mean);
    rep.delta_max = std::move(round_max);
    rep.clients.resize(n);
    gnn::GinModel eval_model(config.shape);
    for (const auto& cl : result.clusters) {
      rep.clusters.push_back(cl.members);
      rep.cluster_ids.push_back(cl.id);
      eval_model.unflatten(cl.model);
      for (int c : cl.members) {
        const Evaluation ev = evaluate(eval_model, clients[c].test_graphs);
        rep.clients[c] = {c, cl.id, local[c].train_loss, ev.loss, ev.accuracy, norms[c]};
      }
    }
    result.rounds.push_back(std::move(rep));
    if (observer && !observer(result)) break;
  }
  // leave each client holding its final cluster model
  for (const auto& cl : result.clusters) {
    for (int c : cl.members) clients[c].params.unflatten(cl.model);
  }
  return result;
}

}  // namespace gcfl
