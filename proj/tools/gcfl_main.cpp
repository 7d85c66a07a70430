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

// gcfl command-line front end.
//
//   gcfl analyze-properties --data-root DIR --dataset PTC_MR
//   gcfl analyze-hetero --data-root DIR --datasets COX2,PTC_MR,ENZYMES
//   gcfl run --config exp.cfg --set rounds=50 --set seeds=0,1
//   gcfl calibrate --config exp.cfg --rounds 50
//   gcfl config-reference

#include <CLI11.hpp>

#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gcfl/common.hpp"
#include "gcfl/graph.hpp"
#include "gcfl/harness.hpp"
#include "gcfl/hetero.hpp"

namespace {

using namespace gcfl;

int exit_code_for(const Error& e) {
  const char* k = e.kind();
  if (std::strcmp(k, "ArgumentError") == 0) return 2;
  if (std::strcmp(k, "IngestionError") == 0) return 3;
  if (std::strcmp(k, "CorruptDatasetError") == 0) return 4;
  if (std::strcmp(k, "UndefinedStatisticError") == 0) return 5;
  if (std::strcmp(k, "ConfigError") == 0) return 6;
  return 1;
}

// Writes to --out when given, otherwise stdout.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path + " for writing");
  fn(out);
  if (!out) throw ArgumentError("write to " + path + " failed");
}

harness::ExperimentConfig load_with_overrides(const std::string& path,
                                              const std::vector<std::string>& sets) {
  harness::ExperimentConfig cfg = path.empty() ? harness::ExperimentConfig{}
                                               : harness::load_config(path);
  for (const auto& s : sets) harness::apply_setting(cfg, s);
  cfg.validate();
  return cfg;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("bad grid value '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph clustered federated learning toolkit"};
  app.require_subcommand(1);

  // analyze-properties
  auto* props = app.add_subcommand("analyze-properties",
                                   "graph property statistics against matched G(n,m) graphs");
  std::string data_root = "data";
  std::string dataset;
  std::uint64_t seed = 0;
  std::string out_path;
  props->add_option("--data-root", data_root, "TU dataset root directory");
  props->add_option("--dataset", dataset, "dataset name, e.g. PTC_MR")->required();
  props->add_option("--seed", seed, "seed for the random counterparts");
  props->add_option("--out", out_path, "CSV output file (default stdout)");

  // analyze-hetero
  auto* het = app.add_subcommand("analyze-hetero",
                                 "pairwise structure/feature heterogeneity between datasets");
  std::vector<std::string> het_sets;
  hetero::HeteroParams hp;
  bool all_pairs = false;
  het->add_option("--data-root", data_root, "TU dataset root directory");
  het->add_option("--datasets", het_sets, "datasets; the first one is the reference")
      ->required()
      ->delimiter(',');
  het->add_option("--awe-length", hp.awe_length, "anonymous walk length");
  het->add_option("--bins", hp.bins, "feature similarity histogram bins");
  het->add_option("--pair-budget", hp.pair_budget, "max graph pairs per dataset pair");
  het->add_option("--walk-budget", hp.walk_budget, "exact enumeration walk budget");
  het->add_option("--walk-samples", hp.walk_samples, "sampled walks when over budget");
  het->add_option("--seed", hp.seed, "sampling seed");
  het->add_flag("--all-pairs", all_pairs, "every unordered pair instead of reference rows");
  het->add_option("--out", out_path, "CSV output file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "run federated experiments");
  std::string config_path;
  std::vector<std::string> sets;
  run->add_option("--config", config_path, "config file (key = value lines)");
  run->add_option("--set", sets, "override, key=value (repeatable)");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "grid search eps1/eps2 on validation accuracy");
  int cal_rounds = 50;
  std::string eps1_text, eps2_text;
  cal->add_option("--config", config_path, "config file (key = value lines)");
  cal->add_option("--set", sets, "override, key=value (repeatable)");
  cal->add_option("--rounds", cal_rounds, "rounds per grid point");
  cal->add_option("--eps1", eps1_text, "comma-separated eps1 grid (default from probe run)");
  cal->add_option("--eps2", eps2_text, "comma-separated eps2 grid (default from probe run)");
  cal->add_option("--out", out_path, "CSV output file (default stdout)");

  app.add_subcommand("config-reference", "print every config key with its default");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*props) {
      const Dataset ds = load_tu_dataset(data_root, dataset);
      const PropertyReport report = property_significance(ds, seed);
      with_output(out_path, [&](std::ostream& o) { report.write_csv(o); });
    } else if (*het) {
      std::vector<Dataset> sets_loaded;
      for (const auto& name : het_sets) {
        Dataset ds = load_tu_dataset(data_root, name);
        if (harness::is_social_dataset(name)) ds = harness::with_onehot_degree(std::move(ds), 0);
        sets_loaded.push_back(std::move(ds));
      }
      with_output(out_path, [&](std::ostream& o) {
        hetero::write_hetero_csv_header(o);
        const std::size_t n = sets_loaded.size();
        for (std::size_t i = 0; i < (all_pairs ? n : 1); ++i) {
          for (std::size_t j = i; j < n; ++j) {
            const auto r = hetero::pairwise_heterogeneity(sets_loaded[i], sets_loaded[j], hp);
            hetero::write_hetero_csv_row(o, sets_loaded[i].name, sets_loaded[j].name, r);
          }
        }
      });
    } else if (*run) {
      const auto cfg = load_with_overrides(config_path, sets);
      const auto runs = harness::run_experiment(cfg);
      for (const auto& r : runs) {
        std::cout << "seed " << r.seed << ' ' << algorithm_name(r.algorithm)
                  << " average_acc=" << r.metrics.average
                  << " clusters=" << r.result.clusters.size() << '\n';
      }
      std::cout << "outputs in " << cfg.output_dir.string() << '\n';
    } else if (*cal) {
      const auto cfg = load_with_overrides(config_path, sets);
      const auto result =
          harness::calibrate(cfg, cal_rounds, parse_grid(eps1_text), parse_grid(eps2_text));
      with_output(out_path, [&](std::ostream& o) { harness::write_calibration_csv(o, result); });
      std::cerr << "best eps1=" << result.best.eps1 << " eps2=" << result.best.eps2
                << " validation_accuracy=" << result.best.validation_accuracy << '\n';
    } else {
      std::cout << harness::config_reference();
    }
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "Error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
