#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "stochif/config.hpp"
#include "stochif/dataset.hpp"
#include "stochif/experiment.hpp"
#include "stochif/pde.hpp"
#include "stochif/plot.hpp"
#include "stochif/sweep.hpp"

namespace fs = std::filesystem;
using namespace stochif;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("stochif_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig tiny(const std::string& name) {
  auto c = preset_config("elliptic");
  c.name = name;
  c.mesh = MeshSizing{0.05, 0.15, 0.3, 1.0};
  c.n_train = 12;
  c.n_test = 6;
  c.train.epochs = 20;
  c.train.restarts = 2;
  c.train.depth = 3;
  c.train.hidden = 4;
  c.train.learning_rate = 1e-2;
  c.out_dir = scratch(name).string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Config, JsonRoundTripAndHash) {
  auto c = preset_config("helmholtz");
  c.n_points = 4;
  const nlohmann::json j = c;
  const auto back = j.get<ExperimentConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);

  auto trained = c;
  trained.train.epochs = 7;
  trained.out_dir = "elsewhere";
  EXPECT_EQ(config_hash(trained), config_hash(c));
  auto moved = c;
  moved.alpha_i = 100.0;
  EXPECT_NE(config_hash(moved), config_hash(c));
}

TEST(Config, EllipticJsonOmitsWaveFields) {
  const nlohmann::json j = preset_config("elliptic");
  EXPECT_FALSE(j.contains("kappa_ratio"));
  EXPECT_EQ(j.at("problem"), "elliptic");
}

TEST(Config, ValidationRejectsBadValues) {
  auto c = preset_config("elliptic");
  c.n_train = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  auto h = preset_config("helmholtz");
  h.alpha_i = 0.5;
  EXPECT_THROW(h.validate(), std::invalid_argument);
  EXPECT_THROW(problem_kind_from_string("parabolic"), std::invalid_argument);
}

TEST(Config, PointsOnCircle) {
  auto c = preset_config("elliptic");
  EXPECT_EQ(c.points().size(), 1u);
  EXPECT_NEAR(c.points()[0].norm(), 0.5, 1e-15);
  c.n_points = 8;
  c.point_radius = 0.6;
  ASSERT_EQ(c.points().size(), 8u);
  for (const auto& x : c.points()) EXPECT_NEAR(x.norm(), 0.6, 1e-15);
}

TEST(Presets, NamesResolve) {
  const auto names = preset_names();
  for (const char* n : {"table1", "table2-alpha10", "table5-alpha1000", "table8-64pt", "figure5-64pt", "figure6-d32"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  for (const auto& n : sweep_preset_names()) EXPECT_NO_THROW(preset_sweep(n)) << n;
  EXPECT_THROW(preset_sweep("table99"), std::invalid_argument);
  const auto full = preset_sweep("table2-alpha10-full");
  EXPECT_EQ(full.base.n_train, 8192);
  EXPECT_EQ(full.base.train.restarts, 20);
}

TEST(Sweep, CellConfigSetsAxisAndName) {
  const auto spec = preset_sweep("table2-alpha10");
  const auto c = cell_config(spec, 1.0, 64.0);
  EXPECT_EQ(c.geometry.interface.p, 1.0);
  EXPECT_EQ(c.geometry.interface.d, 64);
  EXPECT_FALSE(c.geometry.interface.strict_amplitude);
  EXPECT_EQ(c.name, "table2-alpha10_p1_d64");
  EXPECT_NO_THROW(c.validate());
}

TEST(Sweep, ShapeVariationTable) {
  const double expected[3][4] = {{23.55, 30.75, 38.25, 45.92}, {16.11, 17.28, 17.93, 18.26}, {13.32, 13.52, 13.58, 13.60}};
  auto spec = preset_sweep("table1");
  spec.base.out_dir = scratch("table1").string();
  const auto r = run_sweep(spec);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      ASSERT_TRUE(r.cell(i, j).value.has_value());
      EXPECT_NEAR(*r.cell(i, j).value, expected[i][j], 0.03) << i << "," << j;
    }
  }
  const auto files = write_sweep_tables(r, spec.base.out_dir);
  EXPECT_EQ(files.size(), 2u);
  EXPECT_NE(slurp(fs::path(spec.base.out_dir) / "table1.md").find("45.92"), std::string::npos);
}

TEST(Sweep, LogFitRecoversSlope) {
  const std::vector<double> x{1, 4, 8, 16, 64};
  std::vector<double> y;
  for (double v : x) y.push_back(0.02 + 0.003 * std::log(v));
  const auto f = fit_log(x, y);
  ASSERT_TRUE(f.has_value());
  EXPECT_NEAR(f->slope, 0.003, 1e-10);
  EXPECT_NEAR(f->intercept, 0.02, 1e-10);
  EXPECT_FALSE(fit_log(std::vector<double>{2.0}, std::vector<double>{1.0}).has_value());
}

TEST(Dataset, SamplesAreUniformAndReproducible) {
  const auto a = sample_parameters(8, 200, 5, kTrainStream);
  EXPECT_EQ(a, sample_parameters(8, 200, 5, kTrainStream));
  EXPECT_LE(a.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_NEAR(a.mean(), 0.0, 0.05);
  const auto b = sample_parameters(8, 200, 5, kTestStream);
  EXPECT_EQ(count_collisions(a, b), 0u);
  EXPECT_EQ(count_collisions(a, a.topRows(3)), 3u);
  EXPECT_EQ(sample_parameters(8, 50, 5, kTrainStream), a.topRows(50));
}

TEST(Dataset, IndependentOfWorkerCount) {
  const auto c = tiny("workers");
  const QoiSolver solver(c);
  const auto y = sample_parameters(8, 6, 1, kTrainStream);
  const auto one = solve_samples(solver, y, 1);
  const auto three = solve_samples(solver, y, 3);
  EXPECT_EQ(one.q, three.q);
  EXPECT_EQ(one.y, y);
  EXPECT_TRUE(one.q.allFinite());
  EXPECT_GT(one.q.minCoeff(), 0.0);
  EXPECT_EQ(one.meta.solver, "cg-jacobi");
}

TEST(Dataset, UniformCoefficientMatchesReferenceSolve) {
  auto c = tiny("reference");
  c.alpha_i = 1.0;
  c.n_points = 4;
  const QoiSolver solver(c);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(1, 8);
  const auto ds = solve_samples(solver, y, 1);
  ASSERT_EQ(ds.q.rows(), 1);

  auto flat = c.geometry;
  flat.interface.c = 0.0;
  EllipticProblem pb(std::make_shared<const Mesh>(solver.mesh()), flat.build(), 1.0);
  const std::vector<double> zero(8, 0.0);
  const auto field = solve_elliptic(pb, zero);
  const auto ref = evaluate_qoi(field, pb.map, zero, c.points(), QoiKind::kValue);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(ds.q(0, k), ref[k], 1e-8 * std::abs(ref[k])) << k;
}

TEST(Dataset, CsvAndBinaryRoundTrip) {
  const auto c = tiny("roundtrip");
  const auto ds = gen_data(c, 5, 3, kTrainStream);
  for (const auto format : {DatasetFormat::kCsv, DatasetFormat::kBinary}) {
    save_dataset(ds, c.out_dir, "train_5", format);
    const auto back = load_dataset(c.out_dir, "train_5", c);
    EXPECT_EQ(back.y, ds.y);
    EXPECT_EQ(back.q, ds.q);
    EXPECT_EQ(back.meta.config_hash, config_hash(c));
    EXPECT_EQ(back.meta.mesh_checksum, ds.meta.mesh_checksum);
    fs::remove_all(c.out_dir);
    fs::create_directories(c.out_dir);
  }
  save_dataset(ds, c.out_dir, "train_5", DatasetFormat::kCsv);
  auto other = c;
  other.alpha_i = 100.0;
  EXPECT_THROW(load_dataset(c.out_dir, "train_5", other), DatasetMismatch);
}

TEST(Dataset, ZeroVariance) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(4, 2, 3.0);
  EXPECT_TRUE(zero_variance(q));
  q(2, 1) = 3.1;
  EXPECT_FALSE(zero_variance(q));
}

TEST(Experiment, ZeroAmplitudeGivesConstantTarget) {
  auto c = tiny("flat");
  c.geometry.interface.c = 0.0;
  c.train.epochs = 2000;
  const auto r = run_experiment(c, RunOptions{false, {}});
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.front().find("zero-variance"), std::string::npos);
  EXPECT_LE(r.test_error, 1e-3);
}

TEST(Experiment, PersistsAndSweepReusesResult) {
  const auto c = tiny("persist");
  const auto r = run_experiment(c);
  EXPECT_TRUE(std::isfinite(r.test_error));
  EXPECT_EQ(r.reports.size(), 2u);
  for (const char* ext : {".json", ".ckpt", ".history.csv", ".timing.json"})
    EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / ("persist" + std::string(ext)))) << ext;
  const auto again = run_experiment(c);
  EXPECT_EQ(result_record(again), result_record(r));

  SweepSpec spec;
  spec.name = "single";
  spec.base = c;
  spec.rows = {3.0};
  spec.axis = SweepAxis::kDimension;
  spec.columns = {8.0};
  const auto sweep = run_sweep(spec);
  auto cell = cell_config(spec, 3.0, 8.0);
  const auto direct = run_experiment(cell, RunOptions{false, {}});
  ASSERT_TRUE(sweep.cell(0, 0).value.has_value());
  EXPECT_DOUBLE_EQ(*sweep.cell(0, 0).value, direct.test_error);
}

TEST(Experiment, HelmholtzAmplitudesAreBounded) {
  auto c = preset_config("helmholtz");
  c.mesh = MeshSizing{0.001, 0.004, 0.3, 1.0};
  c.out_dir = scratch("helm").string();
  const auto ds = gen_data(c, 8, 1, kTrainStream);
  ASSERT_EQ(ds.q.rows(), 8);
  EXPECT_TRUE(ds.q.allFinite());
  EXPECT_GT(ds.q.minCoeff(), 0.0);
  EXPECT_EQ(ds.meta.solver, "sparse-lu");
  for (Eigen::Index i = 0; i < ds.q.rows(); ++i) {
    EXPECT_GT(ds.q.row(i).norm(), 0.0);
    EXPECT_LT(ds.q.row(i).norm(), 10.0);
  }
}

TEST(Plot, TwoPointsFitExactly) {
  const std::vector<double> x{8, 64};
  const std::vector<double> y{0.011, 0.017};
  const auto f = fit_log(x, y);
  ASSERT_TRUE(f.has_value());
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(f->intercept + f->slope * std::log(x[i]), y[i], 1e-15);
  const auto svg = render_svg({Series{"two", "d", x, y}}, "two");
  EXPECT_NE(svg.find("class=\"fit\""), std::string::npos);
}

TEST(Plot, SeriesRoundTripAndSvg) {
  const auto dir = scratch("plot");
  const Series s{"p=1", "d", {8, 16, 32, 64}, {0.01, 0.012, 0.014, 0.016}};
  write_series(s, (dir / "a.csv").string());
  const auto back = read_series((dir / "a.csv").string());
  EXPECT_EQ(back.label, "p=1");
  EXPECT_EQ(back.x_name, "d");
  EXPECT_EQ(back.x, s.x);
  EXPECT_EQ(back.y, s.y);

  const auto svg = render_svg({s}, "errors");
  EXPECT_EQ(svg, render_svg({s}, "errors"));
  EXPECT_NE(svg.find("class=\"fit\""), std::string::npos);
  EXPECT_NE(svg.find("<svg"), std::string::npos);

  const Series one{"single", "d", {8}, {0.01}};
  const auto lone = render_svg({one}, "one");
  EXPECT_EQ(lone.find("class=\"fit\""), std::string::npos);
  EXPECT_NE(lone.find("class=\"marker\""), std::string::npos);

  std::ofstream(dir / "bad.csv") << "# label: x\n8,abc\n";
  EXPECT_THROW(read_series((dir / "bad.csv").string()), std::runtime_error);
}
