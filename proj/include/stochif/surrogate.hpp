#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace stochif {

/// Widths N_0 = d, hidden ones, N_L = n_outputs for `depth` affine layers.
std::vector<int> default_widths(int d, int n_outputs, int depth = 10, int hidden = 10);

/// Fully connected network z_l = rho(A_l z_{l-1} + b_l) with the leaky ReLU
/// rho(x) = max(beta x, x) on all but the last layer.
class Mlp {
 public:
  Mlp() = default;
  /// Zero weights.
  Mlp(std::vector<int> widths, double beta);

  /// Entries of every A_l and b_l uniform on (-a, a), a = 1/sqrt(10) except the
  /// last layer where a = 1/sqrt(N_L). Layers are drawn in order, A row-major then b.
  static Mlp init(std::vector<int> widths, double beta, std::uint64_t seed);

  const std::vector<int>& widths() const { return widths_; }
  double beta() const { return beta_; }
  int depth() const { return static_cast<int>(a_.size()); }
  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  std::size_t num_parameters() const;

  std::vector<Eigen::MatrixXd>& weights() { return a_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return a_; }
  std::vector<Eigen::VectorXd>& biases() { return b_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }

  /// Columns of `y` are inputs.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& y) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& y) const;

  bool operator==(const Mlp& other) const;

 private:
  std::vector<int> widths_;
  double beta_ = 0.2;
  std::vector<Eigen::MatrixXd> a_;
  std::vector<Eigen::VectorXd> b_;
};

/// Samples stored column-wise: y is d x N, q is N_p x N.
struct Batch {
  Eigen::MatrixXd y;
  Eigen::MatrixXd q;

  std::size_t size() const { return static_cast<std::size_t>(y.cols()); }
};

/// Mean over samples of |q_n - f(y_n)|^2 / |q_n|^2. Throws std::invalid_argument
/// ("zero-norm target") if some q_n vanishes.
double loss(const Mlp& net, const Batch& batch);

struct Gradients {
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::VectorXd> b;
};

/// Exact gradient of loss(); the activation derivative at 0 is beta. Samples
/// with q_n = 0 carry zero weight here.
Gradients backward(const Mlp& net, const Batch& batch, double* loss_value = nullptr);

struct AdamOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

void to_json(nlohmann::json& j, const AdamOptions& o);
void from_json(const nlohmann::json& j, AdamOptions& o);

class AdamState {
 public:
  AdamState(const Mlp& net, AdamOptions options);

  const AdamOptions& options() const { return options_; }
  std::int64_t steps() const { return steps_; }
  const Gradients& first_moment() const { return m_; }
  const Gradients& second_moment() const { return v_; }

  /// Bias-corrected Adam update in place.
  void step(Mlp& net, const Gradients& grads);

 private:
  AdamOptions options_;
  std::int64_t steps_ = 0;
  Gradients m_;
  Gradients v_;
};

struct TrainOptions {
  std::vector<int> widths;
  double beta = 0.2;
  int epochs = 5000;
  int restarts = 3;
  /// Restart r uses seed + r.
  std::uint64_t seed = 1;
  AdamOptions adam;
  /// Restarts trained concurrently; results do not depend on it.
  int workers = 1;
};

struct TrainReport {
  int restart = 0;
  std::uint64_t seed = 0;
  std::vector<double> loss_history;
  double final_train_loss = 0.0;
  /// sqrt(loss) on the test set.
  double test_error = 0.0;
  bool diverged = false;
  double wall_time = 0.0;
  AdamOptions adam;
};

void to_json(nlohmann::json& j, const TrainReport& r);

struct TrainResult {
  Mlp best;
  std::size_t best_index = 0;
  std::vector<TrainReport> reports;
};

/// Full-batch Adam per restart; keeps the restart with the lowest test error.
/// A NaN loss stops that restart and marks it diverged. Throws if all diverge.
TrainResult train(const Batch& train_set, const Batch& test_set, const TrainOptions& options);

/// Fraction of windows [k, k + window] with loss[k + window] <= loss[k].
double nonincreasing_window_fraction(const std::vector<double>& history, int window);

/// Versioned little-endian binary: magic, widths, beta, row-major weight blocks.
void save_checkpoint(const Mlp& net, std::ostream& out);
Mlp load_checkpoint(std::istream& in);
void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(const std::string& path);

}  // namespace stochif
