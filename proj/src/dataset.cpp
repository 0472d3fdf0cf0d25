#include "stochif/dataset.hpp"

#include <atomic>
#include <chrono>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "stochif/random.hpp"

namespace stochif {

namespace {

namespace fs = std::filesystem;

constexpr char kBinaryMagic[8] = {'S', 'T', 'O', 'C', 'H', 'I', 'F', 'D'};
constexpr std::uint32_t kBinaryVersion = 1;

void write_csv(const Eigen::MatrixXd& m, const std::string& prefix, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << prefix << (c + 1);
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << fmt::format("{:.17g}", m(r, c));
    out << '\n';
  }
}

Eigen::MatrixXd read_csv(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  std::getline(in, line);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw std::runtime_error(fmt::format("'{}': expected {} rows", path.string(), rows));
    std::istringstream ss(line);
    std::string cell;
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error(fmt::format("'{}': short row {}", path.string(), r + 1));
      m(r, c) = std::stod(cell);
    }
  }
  return m;
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated dataset file");
  return v;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>(in);
  return m;
}

}  // namespace

void to_json(nlohmann::json& j, const DatasetMeta& m) {
  j = nlohmann::json{{"config_hash", m.config_hash},
                     {"seed", m.seed},
                     {"stream", m.stream},
                     {"mesh_checksum", fmt::format("{:016x}", m.mesh_checksum)},
                     {"mesh_vertices", m.mesh_vertices},
                     {"solver", m.solver},
                     {"solver_tolerance", m.solver_tolerance},
                     {"wall_time", m.wall_time}};
}

void from_json(const nlohmann::json& j, DatasetMeta& m) {
  m.config_hash = j.at("config_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.stream = j.at("stream").get<std::uint64_t>();
  m.mesh_checksum = std::stoull(j.at("mesh_checksum").get<std::string>(), nullptr, 16);
  m.mesh_vertices = j.value("mesh_vertices", std::size_t{0});
  m.solver = j.value("solver", "");
  m.solver_tolerance = j.value("solver_tolerance", 0.0);
  m.wall_time = j.value("wall_time", 0.0);
}

Batch Dataset::batch() const { return Batch{y.transpose(), q.transpose()}; }

SampleError::SampleError(std::size_t index, std::vector<double> y, const std::string& what)
    : std::runtime_error(fmt::format("sample {} failed at y = [{}]: {}", index, fmt::join(y, ", "), what)),
      index_(index),
      y_(std::move(y)) {}

QoiSolver::QoiSolver(const ExperimentConfig& config) : config_(config), map_(config.geometry.build()) {
  config_.validate();
  const auto& g = config_.geometry;
  if (config_.problem == ProblemKind::kElliptic) {
    mesh_ = std::make_shared<const Mesh>(
        build_square_mesh(g.interface.r0, g.map.r_inner, g.map.r_outer, config_.mesh));
  } else {
    mesh_ = std::make_shared<const Mesh>(build_disk_mesh(g.interface.r0, g.map.r_inner, config_.domain_radius,
                                                         config_.pml_thickness, config_.mesh));
  }
  points_ = config_.points();
}

std::string QoiSolver::solver_name() const {
  return config_.problem == ProblemKind::kElliptic ? "cg-jacobi" : "sparse-lu";
}

double QoiSolver::solver_tolerance() const {
  return config_.problem == ProblemKind::kElliptic ? config_.cg_tolerance : 0.0;
}

std::vector<double> QoiSolver::operator()(std::span<const double> y) const {
  if (config_.problem == ProblemKind::kElliptic) {
    EllipticProblem pb(mesh_, map_, config_.alpha_i);
    pb.solver.tolerance = config_.cg_tolerance;
    return evaluate_qoi(solve_elliptic(pb, y), map_, y, points_, QoiKind::kValue);
  }
  HelmholtzProblem pb(mesh_, map_, config_.alpha_i, config_.kappa_o(), config_.kappa_i());
  pb.pml_damping = config_.pml_damping;
  pb.pml_profile = config_.pml_profile;
  return evaluate_qoi(solve_helmholtz(pb, y), map_, y, points_, QoiKind::kAmplitude);
}

Eigen::MatrixXd sample_parameters(int d, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  const CounterRng rng(seed, stream);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) y(static_cast<Eigen::Index>(i), j) = rng.uniform(i, j, -1.0, 1.0);
  return y;
}

Dataset solve_samples(const QoiSolver& solver, const Eigen::MatrixXd& y, int workers) {
  const auto start = std::chrono::steady_clock::now();
  const auto n = static_cast<std::size_t>(y.rows());
  const int np = solver.config().n_points;
  Dataset ds;
  ds.y = y;
  ds.q.resize(y.rows(), np);

  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::map<std::size_t, std::string> failures;
  auto work = [&] {
    std::vector<double> row(static_cast<std::size_t>(y.cols()));
    for (std::size_t i = next++; i < n; i = next++) {
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      try {
        const auto q = solver(row);
        for (int k = 0; k < np; ++k) ds.q(static_cast<Eigen::Index>(i), k) = q[k];
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        failures.emplace(i, e.what());
        next = n;
      }
    }
  };
  const int nt = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (!failures.empty()) {
    const auto& [i, what] = *failures.begin();
    std::vector<double> row(static_cast<std::size_t>(y.cols()));
    for (Eigen::Index j = 0; j < y.cols(); ++j) row[j] = y(static_cast<Eigen::Index>(i), j);
    throw SampleError(i, row, what);
  }

  ds.meta.config_hash = config_hash(solver.config());
  ds.meta.mesh_checksum = solver.mesh().checksum();
  ds.meta.mesh_vertices = solver.mesh().num_vertices();
  ds.meta.solver = solver.solver_name();
  ds.meta.solver_tolerance = solver.solver_tolerance();
  ds.meta.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ds;
}

Dataset gen_data(const QoiSolver& solver, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  const auto y = sample_parameters(solver.config().geometry.interface.d, n, seed, stream);
  auto ds = solve_samples(solver, y, solver.config().workers);
  ds.meta.seed = seed;
  ds.meta.stream = stream;
  return ds;
}

Dataset gen_data(const ExperimentConfig& config, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  return gen_data(QoiSolver(config), n, seed, stream);
}

void save_dataset(const Dataset& ds, const std::string& dir, const std::string& stem, DatasetFormat format) {
  const fs::path base(dir);
  fs::create_directories(base);
  nlohmann::json j{{"format", format == DatasetFormat::kCsv ? "csv" : "binary"},
                   {"rows", ds.y.rows()},
                   {"d", ds.y.cols()},
                   {"n_points", ds.q.cols()},
                   {"meta", ds.meta}};
  if (format == DatasetFormat::kCsv) {
    write_csv(ds.y, "y", base / (stem + "_y.csv"));
    write_csv(ds.q, "q", base / (stem + "_q.csv"));
  } else {
    std::ofstream out(base / (stem + ".bin"), std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write dataset '{}'", stem));
    out.write(kBinaryMagic, sizeof(kBinaryMagic));
    put<std::uint32_t>(out, kBinaryVersion);
    write_matrix(out, ds.y);
    write_matrix(out, ds.q);
  }
  std::ofstream meta(base / (stem + ".json"));
  meta << j.dump(2) << '\n';
}

Dataset load_dataset(const std::string& dir, const std::string& stem) {
  const fs::path base(dir);
  std::ifstream meta(base / (stem + ".json"));
  if (!meta) throw std::runtime_error(fmt::format("no dataset metadata '{}'", (base / (stem + ".json")).string()));
  nlohmann::json j;
  meta >> j;
  Dataset ds;
  ds.meta = j.at("meta").get<DatasetMeta>();
  const auto rows = j.at("rows").get<Eigen::Index>();
  if (j.at("format") == "csv") {
    ds.y = read_csv(base / (stem + "_y.csv"), rows, j.at("d").get<Eigen::Index>());
    ds.q = read_csv(base / (stem + "_q.csv"), rows, j.at("n_points").get<Eigen::Index>());
  } else {
    std::ifstream in(base / (stem + ".bin"), std::ios::binary);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kBinaryMagic, sizeof(magic)) != 0) throw std::runtime_error("not a dataset file");
    if (get<std::uint32_t>(in) != kBinaryVersion) throw std::runtime_error("unsupported dataset version");
    ds.y = read_matrix(in);
    ds.q = read_matrix(in);
  }
  if (ds.y.rows() != rows || ds.q.rows() != rows) throw std::runtime_error("dataset row counts do not match");
  if ((ds.y.array().abs() > 1.0).any()) throw std::runtime_error("dataset has parameters outside [-1, 1]");
  return ds;
}

Dataset load_dataset(const std::string& dir, const std::string& stem, const ExperimentConfig& expected) {
  auto ds = load_dataset(dir, stem);
  const auto want = config_hash(expected);
  if (ds.meta.config_hash != want)
    throw DatasetMismatch(fmt::format("dataset '{}' was generated for config {} but {} was requested", stem,
                                      ds.meta.config_hash, want));
  if (ds.y.cols() != expected.geometry.interface.d || ds.q.cols() != expected.n_points)
    throw DatasetMismatch(fmt::format("dataset '{}' has the wrong shape", stem));
  return ds;
}

std::size_t count_collisions(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  auto key = [](const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[c] = m(r, c);
    return v;
  };
  std::map<std::vector<double>, int> seen;
  for (Eigen::Index r = 0; r < b.rows(); ++r) seen.emplace(key(b, r), 0);
  std::size_t hits = 0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) hits += seen.count(key(a, r));
  return hits;
}

bool zero_variance(const Eigen::MatrixXd& q, double tol) {
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    const double lo = q.col(c).minCoeff();
    const double hi = q.col(c).maxCoeff();
    if (hi - lo > tol * std::max(std::abs(lo), std::abs(hi))) return false;
  }
  return true;
}

}  // namespace stochif
