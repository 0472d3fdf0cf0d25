#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stochif/config.hpp"
#include "stochif/dataset.hpp"
#include "stochif/surrogate.hpp"

namespace stochif {

using Logger = std::function<void(const std::string&)>;

/// Prints to stderr.
Logger stderr_logger();

struct RunOptions {
  /// Reuse and write datasets, result record, checkpoint and loss history under out_dir.
  bool persist = true;
  Logger log;
};

struct ExperimentData {
  Dataset train;
  Dataset test;
};

/// Train split from stream 0, test split from stream 1, both seeded by
/// data_seed. With persist, cached copies under <out_dir>/data/<hash>-s<seed>
/// are reused. Throws if the splits share a row.
ExperimentData prepare_data(const ExperimentConfig& config, const RunOptions& options = {});

struct ExperimentResult {
  ExperimentConfig config;
  std::string config_hash;
  /// sqrt(loss) of the selected network on each split.
  double test_error = 0.0;
  double train_error = 0.0;
  /// |test - train| / test.
  double relative_gap = 0.0;
  std::size_t best_restart = 0;
  std::vector<TrainReport> reports;
  std::vector<std::string> warnings;
  Mlp network;
  double data_wall_time = 0.0;
  double train_wall_time = 0.0;
};

/// The result record: config, errors, selection and per-restart summaries.
/// Wall times and loss histories are left out so that the record depends only
/// on config and seeds.
nlohmann::json result_record(const ExperimentResult& r);

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                const RunOptions& options = {});
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace stochif
