#include "stochif/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

namespace stochif {

namespace {

namespace fs = std::filesystem;

void say(const RunOptions& o, const std::string& msg) {
  if (o.log) o.log(msg);
}

Dataset cached_split(const QoiSolver* solver, const ExperimentConfig& c, const fs::path& dir, int n,
                     std::uint64_t stream, const RunOptions& o, std::unique_ptr<QoiSolver>& owned) {
  const std::string stem = fmt::format("{}_{}", stream == kTrainStream ? "train" : "test", n);
  if (o.persist && fs::exists(dir / (stem + ".json"))) {
    say(o, fmt::format("loading {}", (dir / stem).string()));
    return load_dataset(dir.string(), stem, c);
  }
  if (!solver) {
    owned = std::make_unique<QoiSolver>(c);
    solver = owned.get();
    say(o, fmt::format("mesh: {} vertices, {} triangles", solver->mesh().num_vertices(),
                       solver->mesh().num_triangles()));
  }
  say(o, fmt::format("generating {} {} samples", n, stem.substr(0, stem.find('_'))));
  auto ds = gen_data(*solver, static_cast<std::size_t>(n), c.data_seed, stream);
  if (o.persist) save_dataset(ds, dir.string(), stem);
  return ds;
}

nlohmann::json report_summary(const TrainReport& r) {
  return {{"restart", r.restart},
          {"seed", r.seed},
          {"epochs", r.loss_history.size()},
          {"final_train_loss", r.final_train_loss},
          {"test_error", r.test_error},
          {"diverged", r.diverged},
          {"adam", r.adam}};
}

void write_history(const ExperimentResult& r, const fs::path& path) {
  std::ofstream out(path);
  out << "epoch";
  std::size_t n = 0;
  for (const auto& rep : r.reports) {
    out << ",restart" << rep.restart;
    n = std::max(n, rep.loss_history.size());
  }
  out << '\n';
  for (std::size_t e = 0; e < n; ++e) {
    out << e + 1;
    for (const auto& rep : r.reports) {
      out << ',';
      if (e < rep.loss_history.size()) out << fmt::format("{:.17g}", rep.loss_history[e]);
    }
    out << '\n';
  }
}

}  // namespace

Logger stderr_logger() {
  return [](const std::string& msg) { fmt::print(stderr, "{}\n", msg); };
}

ExperimentData prepare_data(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path dir = fs::path(config.out_dir) / "data" / fmt::format("{}-s{}", config_hash(config), config.data_seed);
  std::unique_ptr<QoiSolver> solver;
  ExperimentData data;
  data.train = cached_split(nullptr, config, dir, config.n_train, kTrainStream, options, solver);
  data.test = cached_split(solver.get(), config, dir, config.n_test, kTestStream, options, solver);
  if (count_collisions(data.train.y, data.test.y) != 0)
    throw std::runtime_error("train and test splits share a parameter sample");
  return data;
}

nlohmann::json result_record(const ExperimentResult& r) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& rep : r.reports) reports.push_back(report_summary(rep));
  return {{"config", r.config},
          {"config_hash", r.config_hash},
          {"test_error", r.test_error},
          {"train_error", r.train_error},
          {"relative_gap", r.relative_gap},
          {"best_restart", r.best_restart},
          {"reports", reports},
          {"warnings", r.warnings}};
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                const RunOptions& options) {
  ExperimentResult r;
  r.config = config;
  r.config_hash = config_hash(config);
  r.data_wall_time = data.train.meta.wall_time + data.test.meta.wall_time;
  const Batch train_set = data.train.batch();
  const Batch test_set = data.test.batch();
  if (zero_variance(data.train.q)) {
    r.warnings.push_back("zero-variance target: the quantity of interest is constant over the training samples");
    say(options, "warning: " + r.warnings.back());
  }

  say(options, fmt::format("training {} restarts x {} epochs on {} samples", config.train.restarts,
                           config.train.epochs, train_set.size()));
  const auto start = std::chrono::steady_clock::now();
  auto trained = train(train_set, test_set, config.train_options());
  r.train_wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.network = std::move(trained.best);
  r.best_restart = trained.best_index;
  r.reports = std::move(trained.reports);
  for (const auto& rep : r.reports)
    if (rep.diverged) r.warnings.push_back(fmt::format("restart {} diverged", rep.restart));
  r.test_error = std::sqrt(loss(r.network, test_set));
  r.train_error = std::sqrt(loss(r.network, train_set));
  r.relative_gap = r.test_error > 0.0 ? std::abs(r.test_error - r.train_error) / r.test_error : 0.0;
  say(options, fmt::format("{}: test error {:.4e}, train error {:.4e} (restart {})", config.name, r.test_error,
                           r.train_error, r.best_restart));

  if (options.persist) {
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    std::ofstream(dir / (config.name + ".json")) << result_record(r).dump(2) << '\n';
    std::ofstream(dir / (config.name + ".timing.json"))
        << nlohmann::json{{"data_wall_time", r.data_wall_time}, {"train_wall_time", r.train_wall_time}}.dump(2)
        << '\n';
    save_checkpoint(r.network, (dir / (config.name + ".ckpt")).string());
    write_history(r, dir / (config.name + ".history.csv"));
  }
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return run_experiment(config, prepare_data(config, options), options);
}

}  // namespace stochif
