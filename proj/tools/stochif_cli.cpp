#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "stochif/config.hpp"
#include "stochif/dataset.hpp"
#include "stochif/experiment.hpp"
#include "stochif/plot.hpp"
#include "stochif/surrogate.hpp"
#include "stochif/sweep.hpp"
#include "stochif/validate.hpp"

namespace fs = std::filesystem;
using namespace stochif;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailure = 1;
constexpr int kRuntimeError = 2;

struct Common {
  std::string preset;
  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir;
  int workers = 0;

  void add(CLI::App* app) {
    app->add_option("--preset", preset, "Named preset (see list-presets)");
    app->add_option("--config", config, "Experiment config JSON file");
    app->add_option("--seed", seed, "Seed for data and training (overrides the config)");
    app->add_option("--out-dir", out_dir, "Output directory");
    app->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  }

  ExperimentConfig resolve() const {
    if (!preset.empty() && !config.empty()) throw std::invalid_argument("give either --preset or --config");
    ExperimentConfig c = !config.empty() ? load_config(config) : preset_config(preset.empty() ? "elliptic" : preset);
    apply(c);
    c.validate();
    return c;
  }

  void apply(ExperimentConfig& c) const {
    if (seed != 0) {
      c.data_seed = seed;
      c.train.seed = seed;
    }
    if (!out_dir.empty()) c.out_dir = out_dir;
    if (workers > 0) c.workers = workers;
  }
};

std::vector<double> parse_row(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  return v;
}

int cmd_gen_data(const Common& common, long count, const std::string& split, const std::string& format) {
  const auto c = common.resolve();
  const QoiSolver solver(c);
  fmt::print(stderr, "mesh: {} vertices, checksum {:016x}\n", solver.mesh().num_vertices(), solver.mesh().checksum());
  const fs::path dir = fs::path(c.out_dir) / "data" / fmt::format("{}-s{}", config_hash(c), c.data_seed);
  for (const auto& [name, stream, n] : {std::tuple{"train", kTrainStream, c.n_train}, std::tuple{"test", kTestStream, c.n_test}}) {
    if (split != "both" && split != name) continue;
    const auto size = static_cast<std::size_t>(count > 0 ? count : n);
    const auto ds = gen_data(solver, size, c.data_seed, stream);
    const auto stem = fmt::format("{}_{}", name, size);
    save_dataset(ds, dir.string(), stem, format == "binary" ? DatasetFormat::kBinary : DatasetFormat::kCsv);
    fmt::print("{}\n", (dir / stem).string());
  }
  save_config(c, (dir / "config.json").string());
  return kOk;
}

int cmd_train(const Common& common) {
  const auto c = common.resolve();
  RunOptions o;
  o.log = stderr_logger();
  const auto r = run_experiment(c, o);
  fmt::print("{}\n", result_record(r).dump(2));
  return kOk;
}

int cmd_sweep(const Common& common, const std::string& spec_file) {
  SweepSpec spec;
  if (!spec_file.empty()) {
    std::ifstream in(spec_file);
    if (!in) throw std::runtime_error("cannot open sweep spec " + spec_file);
    spec = nlohmann::json::parse(in).get<SweepSpec>();
  } else {
    if (common.preset.empty()) throw std::invalid_argument("sweep needs --preset or --spec");
    spec = preset_sweep(common.preset);
  }
  common.apply(spec.base);
  RunOptions o;
  o.log = stderr_logger();
  const auto result = run_sweep(spec, o);
  for (const auto& path : write_sweep_tables(result, spec.base.out_dir)) fmt::print("{}\n", path);
  bool failed = false;
  for (const auto& cell : result.cells) failed = failed || !cell.value;
  return failed ? kRuntimeError : kOk;
}

int cmd_validate(std::vector<std::string> suites) {
  if (suites.empty()) suites = suite_names();
  bool ok = true;
  for (const auto& s : suites) {
    for (const auto& c : run_suite(s, stderr_logger())) {
      fmt::print("{}\n", format_check(c));
      ok = ok && c.passed;
    }
  }
  return ok ? kOk : kCheckFailure;
}

int cmd_plot(const std::vector<std::string>& files, const std::string& out, const std::string& title) {
  plot_files(files, out, title);
  fmt::print("{}\n", out);
  return kOk;
}

int cmd_evaluate(const std::string& checkpoint, const std::vector<std::string>& ys, const std::string& input) {
  const Mlp net = load_checkpoint(checkpoint);
  std::vector<std::vector<double>> rows;
  for (const auto& y : ys) rows.push_back(parse_row(y));
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot open " + input);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == 'y' || line[0] == '#') continue;
      rows.push_back(parse_row(line));
    }
  }
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != net.input_dim())
      throw std::invalid_argument(fmt::format("expected {} parameters, got {}", net.input_dim(), row.size()));
    const Eigen::VectorXd q = net.forward(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(row.data(), net.input_dim())));
    fmt::print("{:.17g}\n", fmt::join(q.data(), q.data() + q.size(), ","));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural surrogates for point values of stochastic interface problems"};
  app.require_subcommand(1);

  Common common;
  long count = 0;
  std::string split = "both";
  std::string format = "csv";
  auto* gen = app.add_subcommand("gen-data", "Generate and store train/test datasets");
  common.add(gen);
  gen->add_option("-n,--count", count, "Samples per split (default from the config)");
  gen->add_option("--split", split, "train, test or both")->check(CLI::IsMember({"train", "test", "both"}));
  gen->add_option("--format", format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));

  auto* tr = app.add_subcommand("train", "Generate data if needed, train and write the result record");
  common.add(tr);

  std::string spec_file;
  auto* sw = app.add_subcommand("sweep", "Run a table or figure sweep");
  common.add(sw);
  sw->add_option("--spec", spec_file, "Sweep spec JSON file");

  std::vector<std::string> suites;
  auto* va = app.add_subcommand("validate", "Run oracle and invariant suites");
  va->add_option("--suite", suites, "Suites to run (default all)")->check(CLI::IsMember(suite_names()));

  std::vector<std::string> files;
  std::string svg = "figure.svg";
  std::string title;
  auto* pl = app.add_subcommand("plot", "Render series files to SVG");
  pl->add_option("files", files, "Series CSV files")->required();
  pl->add_option("-o,--output", svg, "Output SVG");
  pl->add_option("--title", title, "Figure title");

  std::string checkpoint;
  std::vector<std::string> ys;
  std::string input;
  auto* ev = app.add_subcommand("evaluate", "Predict q for given parameters with a checkpoint");
  ev->add_option("--checkpoint", checkpoint, "Network checkpoint")->required();
  ev->add_option("--y", ys, "Comma-separated parameter vector (repeatable)");
  ev->add_option("--input", input, "CSV file of parameter rows");

  auto* ls = app.add_subcommand("list-presets", "Print preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kRuntimeError;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common, count, split, format);
    if (tr->parsed()) return cmd_train(common);
    if (sw->parsed()) return cmd_sweep(common, spec_file);
    if (va->parsed()) return cmd_validate(suites);
    if (pl->parsed()) return cmd_plot(files, svg, title);
    if (ev->parsed()) return cmd_evaluate(checkpoint, ys, input);
    if (ls->parsed()) {
      for (const auto& n : preset_names()) fmt::print("{}\n", n);
      return kOk;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntimeError;
  }
  return kRuntimeError;
}
