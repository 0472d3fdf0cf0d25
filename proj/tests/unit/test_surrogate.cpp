#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "stochif/random.hpp"
#include "stochif/surrogate.hpp"

using namespace stochif;

namespace {

Batch random_batch(int d, int np, int n, std::uint64_t seed) {
  const CounterRng rng(seed, 0);
  Batch b{Eigen::MatrixXd(d, n), Eigen::MatrixXd(np, n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) b.y(j, i) = rng.uniform(i, j, -1.0, 1.0);
    for (int k = 0; k < np; ++k) b.q(k, i) = 1.0 + rng.uniform(i, d + k);
  }
  return b;
}

// Perturbs one parameter selected by (layer, flat index, bias flag).
double& param(Mlp& net, int layer, Eigen::Index idx, bool bias) {
  return bias ? net.biases()[layer](idx) : net.weights()[layer].data()[idx];
}

}  // namespace

TEST(Widths, DefaultArchitecture) {
  const auto w = default_widths(16, 3);
  ASSERT_EQ(w.size(), 11u);
  EXPECT_EQ(w.front(), 16);
  EXPECT_EQ(w.back(), 3);
  for (std::size_t i = 1; i + 1 < w.size(); ++i) EXPECT_EQ(w[i], 10);
}

TEST(Mlp, InitBoundsAndSpread) {
  const auto net = Mlp::init(default_widths(8, 100), 0.2, 3);
  for (int l = 0; l < net.depth(); ++l) {
    const double a = l + 1 == net.depth() ? 0.1 : 1.0 / std::sqrt(10.0);
    EXPECT_LT(net.weights()[l].cwiseAbs().maxCoeff(), a);
    EXPECT_LT(net.biases()[l].cwiseAbs().maxCoeff(), a);
  }
  const auto& last = net.weights().back();
  EXPECT_NEAR(last.mean(), 0.0, 0.01);
  EXPECT_NEAR(last.array().square().mean(), 0.01 / 3.0, 0.001);
  EXPECT_EQ(Mlp::init(default_widths(8, 100), 0.2, 3), net);
  EXPECT_FALSE(Mlp::init(default_widths(8, 100), 0.2, 4) == net);
}

TEST(Mlp, ParameterCount) {
  const Mlp net({4, 10, 2}, 0.2);
  EXPECT_EQ(net.num_parameters(), 4u * 10 + 10 + 10 * 2 + 2);
}

TEST(Mlp, UnitSlopeMakesTheNetworkAffine) {
  const auto net = Mlp::init({3, 5, 5, 2}, 1.0, 2);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
  for (int l = 0; l < net.depth(); ++l) {
    c = net.weights()[l] * c + net.biases()[l];
    m = net.weights()[l] * m;
  }
  const Eigen::VectorXd y = Eigen::Vector3d(0.3, -0.7, 0.1);
  EXPECT_TRUE(net.forward(y).isApprox(m * y + c, 1e-13));
}

TEST(Mlp, PiecewiseLinearAlongLines) {
  const auto net = Mlp::init({2, 6, 6, 1}, 0.2, 5);
  const Eigen::VectorXd a = Eigen::Vector2d(-0.8, 0.3);
  const Eigen::VectorXd b = Eigen::Vector2d(0.9, -0.4);
  int nonlinear = 0;
  const int n = 2000;
  const double h = 1.0 / n;
  for (int k = 1; k < n; ++k) {
    const double t = k * h;
    const double f0 = net.forward(Eigen::VectorXd(a + (t - h) * (b - a)))(0);
    const double f1 = net.forward(Eigen::VectorXd(a + t * (b - a)))(0);
    const double f2 = net.forward(Eigen::VectorXd(a + (t + h) * (b - a)))(0);
    nonlinear += std::abs(f0 - 2 * f1 + f2) > 1e-12;
  }
  // Each kink touches at most two stencils; 12 neurons switch at most a few times.
  EXPECT_LE(nonlinear, 60);
}

TEST(Mlp, ZeroSlopeIdentityOnNonnegativeInputs) {
  Mlp net({3, 3, 3}, 0.0);
  net.weights()[0].setIdentity();
  net.weights()[1].setIdentity();
  for (const Eigen::Vector3d& y : {Eigen::Vector3d(0.0, 0.5, 2.0), Eigen::Vector3d(1.0, 0.0, 0.25)})
    EXPECT_EQ(net.forward(Eigen::VectorXd(y)), Eigen::VectorXd(y));
  EXPECT_EQ(net.forward(Eigen::VectorXd(Eigen::Vector3d(-1.0, 0.5, 0.0)))(0), 0.0);
}

TEST(Mlp, InitMeanOverManyDraws) {
  double sum = 0.0;
  double sq = 0.0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; n < 100000; ++seed) {
    const auto net = Mlp::init({16, 32, 32, 16}, 0.2, seed);
    for (const auto& a : net.weights()) {
      sum += a.sum();
      sq += a.squaredNorm();
      n += a.size();
    }
  }
  const double mean = sum / n;
  const double stderr_mean = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_LE(std::abs(mean), 3.0 * stderr_mean);
}

TEST(Loss, SpecExamples) {
  Mlp net({1, 2}, 0.2);
  Batch b{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd(2, 1)};
  b.q << 3.0, 4.0;
  EXPECT_DOUBLE_EQ(loss(net, b), 1.0);
  net.biases()[0] << 3.0, 4.0;
  EXPECT_EQ(loss(net, b), 0.0);

  Mlp scalar({1, 1}, 0.2);
  scalar.weights()[0](0, 0) = 1.0;
  Batch two{Eigen::MatrixXd(1, 2), Eigen::MatrixXd::Constant(1, 2, 1.0)};
  two.y << 0.9, 1.0 + std::sqrt(0.03);
  EXPECT_NEAR(loss(scalar, two), 0.02, 1e-15);
}

TEST(Loss, RelativeSquaredError) {
  Mlp net({1, 1}, 0.2);
  Batch b{Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd(1, 2)};
  b.q << 1.0, 2.0;
  EXPECT_DOUBLE_EQ(loss(net, b), 1.0);
  net.biases()[0](0) = 0.9;
  b.q << 1.0, 1.0;
  EXPECT_NEAR(loss(net, b), 0.01, 1e-15);
  net.biases()[0](0) = 1.2;
  b.q << 1.0, 1.0;
  EXPECT_NEAR(loss(net, b), 0.04, 1e-15);
  b.q << 1.0, 0.0;
  EXPECT_THROW(loss(net, b), std::invalid_argument);
}

TEST(Backward, ZeroTargetHasFiniteGradient) {
  const auto net = Mlp::init({2, 4, 1}, 0.2, 1);
  Batch b = random_batch(2, 1, 4, 1);
  b.q(0, 2) = 0.0;
  const auto g = backward(net, b);
  for (const auto& a : g.a) EXPECT_TRUE(a.allFinite());
  for (const auto& v : g.b) EXPECT_TRUE(v.allFinite());
}

TEST(Backward, AllZeroTargetsAndZeroNetwork) {
  Mlp net({2, 3, 1}, 0.2);
  Batch b = random_batch(2, 1, 4, 1);
  b.q.setZero();
  const auto g = backward(net, b);
  for (const auto& a : g.a) EXPECT_TRUE(a.allFinite());
  for (const auto& v : g.b) EXPECT_TRUE(v.allFinite());
}

TEST(Backward, AffineClosedForm) {
  // f(y) = w y + c with one sample: d/dc of (q - f)^2 / q^2 = -2 (q - f) / q^2.
  Mlp net({1, 1}, 0.2);
  net.weights()[0](0, 0) = 0.5;
  net.biases()[0](0) = 0.25;
  Batch b{Eigen::MatrixXd::Constant(1, 1, 0.8), Eigen::MatrixXd::Constant(1, 1, 2.0)};
  double value = 0.0;
  const auto g = backward(net, b, &value);
  const double f = 0.5 * 0.8 + 0.25;
  EXPECT_NEAR(value, (2.0 - f) * (2.0 - f) / 4.0, 1e-15);
  EXPECT_NEAR(g.b[0](0), -2.0 * (2.0 - f) / 4.0, 1e-15);
  EXPECT_NEAR(g.a[0](0, 0), -2.0 * (2.0 - f) * 0.8 / 4.0, 1e-15);
}

class BackwardFd : public ::testing::TestWithParam<std::vector<int>> {};

TEST_P(BackwardFd, MatchesFiniteDifferences) {
  Mlp net = Mlp::init(GetParam(), 0.2, 9);
  const Batch b = random_batch(GetParam().front(), GetParam().back(), 16, 4);
  const auto g = backward(net, b);
  const double eps = 1e-6;
  double worst = 0.0;
  for (int l = 0; l < net.depth(); ++l) {
    for (const bool bias : {false, true}) {
      const Eigen::Index n = bias ? net.biases()[l].size() : net.weights()[l].size();
      for (Eigen::Index i = 0; i < n; ++i) {
        double& p = param(net, l, i, bias);
        const double saved = p;
        p = saved + eps;
        const double up = loss(net, b);
        p = saved - eps;
        const double down = loss(net, b);
        p = saved;
        const double fd = (up - down) / (2 * eps);
        const double exact = bias ? g.b[l](i) : g.a[l].data()[i];
        worst = std::max(worst, std::abs(fd - exact) / std::max({std::abs(fd), std::abs(exact), 1e-6}));
      }
    }
  }
  EXPECT_LE(worst, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Widths, BackwardFd,
                         ::testing::Values(std::vector<int>{3, 4, 2}, std::vector<int>{3, 7, 7, 2}));

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Mlp net = Mlp::init({2, 3, 1}, 0.2, 1);
  const Mlp before = net;
  AdamState adam(net, AdamOptions{});
  Gradients zero{{Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(1, 3)},
                 {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(1)}};
  adam.step(net, zero);
  EXPECT_EQ(net, before);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Mlp net({1, 1}, 0.2);
  AdamState adam(net, AdamOptions{0.01, 0.9, 0.999, 1e-8});
  Gradients g{{Eigen::MatrixXd::Constant(1, 1, 3.0)}, {Eigen::VectorXd::Constant(1, -0.5)}};
  adam.step(net, g);
  EXPECT_NEAR(net.weights()[0](0, 0), -0.01, 1e-9);
  EXPECT_NEAR(net.biases()[0](0), 0.01, 1e-9);
}

TEST(Adam, MinimizesQuadratic) {
  Mlp net({1, 1}, 0.2);
  AdamState adam(net, AdamOptions{1e-2, 0.9, 0.999, 1e-8});
  for (int k = 0; k < 10000; ++k) {
    const double w = net.biases()[0](0);
    Gradients g{{Eigen::MatrixXd::Zero(1, 1)}, {Eigen::VectorXd::Constant(1, 2.0 * (w - 5.0))}};
    adam.step(net, g);
  }
  EXPECT_NEAR(net.biases()[0](0), 5.0, 1e-3);
}

TEST(Train, DeterministicAcrossWorkerCounts) {
  const Batch tr = random_batch(2, 1, 32, 1);
  const Batch te = random_batch(2, 1, 16, 2);
  TrainOptions o;
  o.widths = {2, 5, 5, 1};
  o.epochs = 50;
  o.restarts = 3;
  o.adam.learning_rate = 1e-2;
  o.workers = 1;
  const auto a = train(tr, te, o);
  o.workers = 3;
  const auto b = train(tr, te, o);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.best_index, b.best_index);
  ASSERT_EQ(a.reports.size(), 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(a.reports[r].loss_history, b.reports[r].loss_history);
    EXPECT_EQ(a.reports[r].seed, o.seed + r);
  }
  for (const auto& r : a.reports) EXPECT_LE(a.reports[a.best_index].test_error, r.test_error);
}

TEST(Train, FitsAnAffineTarget) {
  Batch tr = random_batch(2, 1, 64, 3);
  Batch te = random_batch(2, 1, 32, 4);
  for (Batch* b : {&tr, &te})
    for (Eigen::Index i = 0; i < b->y.cols(); ++i) b->q(0, i) = 2.0 + 0.5 * b->y(0, i) - 0.3 * b->y(1, i);
  TrainOptions o;
  o.widths = {2, 4, 1};
  o.epochs = 2000;
  o.restarts = 2;
  o.adam.learning_rate = 3e-2;
  const auto r = train(tr, te, o);
  EXPECT_LE(r.reports[r.best_index].test_error, 1e-3);
}

TEST(Train, WindowFraction) {
  EXPECT_DOUBLE_EQ(nonincreasing_window_fraction({5, 4, 3, 2, 1}, 2), 1.0);
  EXPECT_DOUBLE_EQ(nonincreasing_window_fraction({1, 2, 3, 4}, 1), 0.0);
  EXPECT_DOUBLE_EQ(nonincreasing_window_fraction({1, 3, 2, 0}, 2), 0.5);
}

TEST(Checkpoint, RoundTrip) {
  const auto net = Mlp::init(default_widths(5, 3, 4, 6), 0.2, 11);
  std::stringstream ss;
  save_checkpoint(net, ss);
  const Mlp back = load_checkpoint(ss);
  EXPECT_EQ(back, net);
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  EXPECT_EQ(back.forward(y), net.forward(y));
  std::stringstream bad("not a checkpoint");
  EXPECT_THROW(load_checkpoint(bad), std::runtime_error);
}
