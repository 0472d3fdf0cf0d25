#include "stochif/surrogate.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "stochif/random.hpp"

namespace stochif {

namespace {

Eigen::MatrixXd leaky(const Eigen::MatrixXd& z, double beta) {
  return z.unaryExpr([beta](double v) { return v > 0.0 ? v : beta * v; });
}

Eigen::MatrixXd leaky_slope(const Eigen::MatrixXd& z, double beta) {
  return z.unaryExpr([beta](double v) { return v > 0.0 ? 1.0 : beta; });
}

void check_batch(const Mlp& net, const Batch& batch) {
  if (batch.y.rows() != net.input_dim() || batch.q.rows() != net.output_dim() || batch.y.cols() != batch.q.cols())
    throw std::invalid_argument("batch shape does not match the network");
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
}

}  // namespace

std::vector<int> default_widths(int d, int n_outputs, int depth, int hidden) {
  if (d < 1 || n_outputs < 1 || depth < 1 || hidden < 1) throw std::invalid_argument("invalid network shape");
  std::vector<int> w(depth + 1, hidden);
  w.front() = d;
  w.back() = n_outputs;
  return w;
}

Mlp::Mlp(std::vector<int> widths, double beta) : widths_(std::move(widths)), beta_(beta) {
  if (widths_.size() < 2) throw std::invalid_argument("network needs at least one layer");
  for (int w : widths_) {
    if (w < 1) throw std::invalid_argument("layer widths must be positive");
  }
  if (!(beta_ >= 0.0 && beta_ <= 1.0)) throw std::invalid_argument("leaky ReLU slope must lie in [0, 1]");
  for (std::size_t l = 1; l < widths_.size(); ++l) {
    a_.push_back(Eigen::MatrixXd::Zero(widths_[l], widths_[l - 1]));
    b_.push_back(Eigen::VectorXd::Zero(widths_[l]));
  }
}

Mlp Mlp::init(std::vector<int> widths, double beta, std::uint64_t seed) {
  Mlp net(std::move(widths), beta);
  SplitMix64 gen(seed);
  for (int l = 0; l < net.depth(); ++l) {
    const bool last = l + 1 == net.depth();
    const double a = last ? 1.0 / std::sqrt(static_cast<double>(net.output_dim())) : 1.0 / std::sqrt(10.0);
    auto& m = net.a_[l];
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = a * (2.0 * gen.uniform() - 1.0);
    for (Eigen::Index r = 0; r < net.b_[l].size(); ++r) net.b_[l][r] = a * (2.0 * gen.uniform() - 1.0);
  }
  return net;
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < a_.size(); ++l) n += a_[l].size() + b_[l].size();
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& y) const {
  if (y.rows() != input_dim()) throw std::invalid_argument("input has wrong dimension");
  Eigen::MatrixXd h = y;
  for (int l = 0; l < depth(); ++l) {
    Eigen::MatrixXd z = a_[l] * h;
    z.colwise() += b_[l];
    h = l + 1 < depth() ? leaky(z, beta_) : std::move(z);
  }
  return h;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& y) const {
  return forward(Eigen::MatrixXd(y)).col(0);
}

bool Mlp::operator==(const Mlp& other) const {
  if (widths_ != other.widths_ || beta_ != other.beta_) return false;
  for (std::size_t l = 0; l < a_.size(); ++l) {
    if (a_[l] != other.a_[l] || b_[l] != other.b_[l]) return false;
  }
  return true;
}

double loss(const Mlp& net, const Batch& batch) {
  check_batch(net, batch);
  const Eigen::VectorXd norms = batch.q.colwise().squaredNorm();
  if ((norms.array() == 0.0).any()) throw std::invalid_argument("zero-norm target");
  const Eigen::MatrixXd r = net.forward(batch.y) - batch.q;
  return (r.colwise().squaredNorm().transpose().array() / norms.array()).mean();
}

Gradients backward(const Mlp& net, const Batch& batch, double* loss_value) {
  check_batch(net, batch);
  const int depth = net.depth();
  const double n = static_cast<double>(batch.size());

  std::vector<Eigen::MatrixXd> h(depth);
  std::vector<Eigen::MatrixXd> z(depth);
  const Eigen::MatrixXd* in = &batch.y;
  for (int l = 0; l < depth; ++l) {
    z[l] = net.weights()[l] * *in;
    z[l].colwise() += net.biases()[l];
    if (l + 1 < depth) {
      h[l] = leaky(z[l], net.beta());
      in = &h[l];
    }
  }

  const Eigen::RowVectorXd norms = batch.q.colwise().squaredNorm();
  const Eigen::RowVectorXd w = norms.unaryExpr([](double s) { return s > 0.0 ? 1.0 / s : 0.0; });
  const Eigen::MatrixXd r = z[depth - 1] - batch.q;
  if (loss_value) *loss_value = (r.colwise().squaredNorm().array() * w.array()).sum() / n;

  Gradients g;
  g.a.resize(depth);
  g.b.resize(depth);
  Eigen::MatrixXd delta = r.array().rowwise() * (2.0 / n * w.array());
  for (int l = depth - 1; l >= 0; --l) {
    const Eigen::MatrixXd& prev = l > 0 ? h[l - 1] : batch.y;
    g.a[l] = delta * prev.transpose();
    g.b[l] = delta.rowwise().sum();
    if (l > 0) delta = (net.weights()[l].transpose() * delta).cwiseProduct(leaky_slope(z[l - 1], net.beta()));
  }
  return g;
}

void to_json(nlohmann::json& j, const AdamOptions& o) {
  j = nlohmann::json{{"learning_rate", o.learning_rate},
                     {"beta1", o.beta1},
                     {"beta2", o.beta2},
                     {"epsilon", o.epsilon}};
}

void from_json(const nlohmann::json& j, AdamOptions& o) {
  o.learning_rate = j.value("learning_rate", 2e-4);
  o.beta1 = j.value("beta1", 0.9);
  o.beta2 = j.value("beta2", 0.999);
  o.epsilon = j.value("epsilon", 1e-8);
}

AdamState::AdamState(const Mlp& net, AdamOptions options) : options_(options) {
  for (int l = 0; l < net.depth(); ++l) {
    m_.a.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
    m_.b.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
  }
  v_ = m_;
}

void AdamState::step(Mlp& net, const Gradients& grads) {
  if (grads.a.size() != m_.a.size()) throw std::invalid_argument("gradient does not match the optimizer state");
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < m_.a.size(); ++l) {
    update(net.weights()[l], m_.a[l], v_.a[l], grads.a[l]);
    update(net.biases()[l], m_.b[l], v_.b[l], grads.b[l]);
  }
}

void to_json(nlohmann::json& j, const TrainReport& r) {
  j = nlohmann::json{{"restart", r.restart},
                     {"seed", r.seed},
                     {"epochs", r.loss_history.size()},
                     {"final_train_loss", r.final_train_loss},
                     {"test_error", r.test_error},
                     {"diverged", r.diverged},
                     {"wall_time", r.wall_time},
                     {"adam", r.adam},
                     {"loss_history", r.loss_history}};
}

namespace {

std::pair<TrainReport, Mlp> train_restart(const Batch& train_set, const Batch& test_set,
                                          const TrainOptions& options, int restart) {
  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  report.restart = restart;
  report.seed = options.seed + static_cast<std::uint64_t>(restart);
  report.adam = options.adam;

  Mlp net = Mlp::init(options.widths, options.beta, report.seed);
  AdamState adam(net, options.adam);
  report.loss_history.reserve(options.epochs);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    double value = 0.0;
    const Gradients g = backward(net, train_set, &value);
    report.loss_history.push_back(value);
    if (!std::isfinite(value)) {
      report.diverged = true;
      break;
    }
    adam.step(net, g);
  }
  if (!report.diverged) {
    report.final_train_loss = loss(net, train_set);
    report.test_error = std::sqrt(loss(net, test_set));
    report.diverged = !std::isfinite(report.test_error);
  }
  if (report.diverged) report.test_error = std::numeric_limits<double>::infinity();
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(report), std::move(net)};
}

}  // namespace

TrainResult train(const Batch& train_set, const Batch& test_set, const TrainOptions& options) {
  if (train_set.size() == 0 || test_set.size() == 0) throw std::invalid_argument("train and test sets must be nonempty");
  if (options.restarts < 1 || options.epochs < 0) throw std::invalid_argument("invalid training schedule");
  const Mlp probe(options.widths, options.beta);
  // Validates shapes and rejects zero-norm targets up front.
  loss(probe, train_set);
  loss(probe, test_set);

  std::vector<std::pair<TrainReport, Mlp>> runs(options.restarts);
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(options.restarts);
  auto worker = [&] {
    for (int r = next++; r < options.restarts; r = next++) {
      try {
        runs[r] = train_restart(train_set, test_set, options, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min(options.workers, options.restarts));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  TrainResult result;
  bool found = false;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& rep = runs[r].first;
    if (!rep.diverged && (!found || rep.test_error < runs[result.best_index].first.test_error)) {
      result.best_index = r;
      found = true;
    }
  }
  if (!found) throw std::runtime_error("all training restarts diverged");
  result.best = runs[result.best_index].second;
  for (auto& run : runs) result.reports.push_back(std::move(run.first));
  return result;
}

double nonincreasing_window_fraction(const std::vector<double>& history, int window) {
  if (window < 1 || history.size() <= static_cast<std::size_t>(window))
    throw std::invalid_argument("loss history shorter than the window");
  std::size_t good = 0;
  const std::size_t n = history.size() - window;
  for (std::size_t k = 0; k < n; ++k) {
    if (history[k + window] <= history[k]) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(n);
}

namespace {

constexpr char kNetMagic[8] = {'S', 'T', 'O', 'C', 'H', 'I', 'F', 'N'};
constexpr std::uint32_t kNetVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void save_checkpoint(const Mlp& net, std::ostream& out) {
  out.write(kNetMagic, 8);
  put_u32(out, kNetVersion);
  put_u32(out, static_cast<std::uint32_t>(net.widths().size()));
  for (int w : net.widths()) put_u32(out, static_cast<std::uint32_t>(w));
  put_f64(out, net.beta());
  for (int l = 0; l < net.depth(); ++l) {
    const auto& a = net.weights()[l];
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) put_f64(out, a(r, c));
    for (Eigen::Index r = 0; r < net.biases()[l].size(); ++r) put_f64(out, net.biases()[l][r]);
  }
}

Mlp load_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kNetMagic, 8) != 0) throw std::runtime_error("not a network checkpoint");
  const auto version = get_u32(in);
  if (version != kNetVersion) throw std::runtime_error(fmt::format("unsupported checkpoint version {}", version));
  const auto n = get_u32(in);
  if (n < 2 || n > 10000) throw std::runtime_error("corrupt checkpoint header");
  std::vector<int> widths(n);
  for (auto& w : widths) w = static_cast<int>(get_u32(in));
  const double beta = get_f64(in);
  Mlp net(widths, beta);
  for (int l = 0; l < net.depth(); ++l) {
    auto& a = net.weights()[l];
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = get_f64(in);
    for (Eigen::Index r = 0; r < net.biases()[l].size(); ++r) net.biases()[l][r] = get_f64(in);
  }
  return net;
}

void save_checkpoint(const Mlp& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_checkpoint(net, out);
}

Mlp load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load_checkpoint(in);
}

}  // namespace stochif
