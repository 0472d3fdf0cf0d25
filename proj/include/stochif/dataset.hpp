#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stochif/config.hpp"
#include "stochif/surrogate.hpp"

namespace stochif {

/// Random streams of the two splits.
inline constexpr std::uint64_t kTrainStream = 0;
inline constexpr std::uint64_t kTestStream = 1;

struct DatasetMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t mesh_checksum = 0;
  std::size_t mesh_vertices = 0;
  std::string solver;
  double solver_tolerance = 0.0;
  double wall_time = 0.0;
};

void to_json(nlohmann::json& j, const DatasetMeta& m);
void from_json(const nlohmann::json& j, DatasetMeta& m);

/// Rows are samples: y is N x d, q is N x N_p.
struct Dataset {
  Eigen::MatrixXd y;
  Eigen::MatrixXd q;
  DatasetMeta meta;

  std::size_t size() const { return static_cast<std::size_t>(y.rows()); }
  /// Column-major view for training.
  Batch batch() const;
};

class SampleError : public std::runtime_error {
 public:
  SampleError(std::size_t index, std::vector<double> y, const std::string& what);
  std::size_t index() const { return index_; }
  const std::vector<double>& y() const { return y_; }

 private:
  std::size_t index_;
  std::vector<double> y_;
};

class DatasetMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mesh and PDE of a config, built once and shared by all samples.
class QoiSolver {
 public:
  explicit QoiSolver(const ExperimentConfig& config);

  const ExperimentConfig& config() const { return config_; }
  const Mesh& mesh() const { return *mesh_; }
  const DomainMap& map() const { return map_; }
  std::string solver_name() const;
  double solver_tolerance() const;

  /// N_p values (solution values or amplitudes) at the configured points.
  std::vector<double> operator()(std::span<const double> y) const;

 private:
  ExperimentConfig config_;
  std::shared_ptr<const Mesh> mesh_;
  DomainMap map_;
  std::vector<Vec2> points_;
};

/// y_n drawn uniformly from [-1, 1]^d with CounterRng(seed, stream); row n
/// depends only on (seed, stream, n).
Eigen::MatrixXd sample_parameters(int d, std::size_t n, std::uint64_t seed, std::uint64_t stream);

/// Solves each row of y on `workers` threads. Throws SampleError on failure.
Dataset solve_samples(const QoiSolver& solver, const Eigen::MatrixXd& y, int workers);

Dataset gen_data(const ExperimentConfig& config, std::size_t n, std::uint64_t seed, std::uint64_t stream);
Dataset gen_data(const QoiSolver& solver, std::size_t n, std::uint64_t seed, std::uint64_t stream);

enum class DatasetFormat { kCsv, kBinary };

/// CSV: <stem>_y.csv, <stem>_q.csv and <stem>.json. Binary: <stem>.bin and <stem>.json.
void save_dataset(const Dataset& ds, const std::string& dir, const std::string& stem,
                  DatasetFormat format = DatasetFormat::kCsv);
/// Throws DatasetMismatch if the stored hash differs from config_hash(expected).
Dataset load_dataset(const std::string& dir, const std::string& stem, const ExperimentConfig& expected);
/// Loads without the hash check.
Dataset load_dataset(const std::string& dir, const std::string& stem);

/// Number of rows of a that also occur in b.
std::size_t count_collisions(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// True if every column of q is constant to relative tolerance tol.
bool zero_variance(const Eigen::MatrixXd& q, double tol = 1e-12);

}  // namespace stochif
