#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "amnn/network.hpp"
#include "oracles.hpp"

namespace amnn {
namespace {

Mlp random_net(const std::vector<std::size_t>& sizes, std::mt19937_64& rng, Activation hidden, Activation output) {
  Mlp net(sizes, hidden, output);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& p : net.parameters()) p = u(rng);
  return net;
}

Matrix<double> random_targets(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  return oracle::random_matrix(rows, cols, rng, 0.0, 1.0);
}

TEST(SquaredError, Anchors) {
  const std::vector<double> v{1.0, 0.0}, w{0.0, 1.0};
  EXPECT_EQ(squared_error(v, v), 0.0);
  EXPECT_DOUBLE_EQ(squared_error(v, w), 1.0);
  EXPECT_DOUBLE_EQ(squared_error(std::vector<double>{1.0}, std::vector<double>{0.5}), 0.125);
  EXPECT_THROW(squared_error(v, std::vector<double>{1.0}), Error);
}

TEST(Mlp, ParameterLayout) {
  Mlp net({2, 3, 2}, Activation::logistic, Activation::logistic);
  EXPECT_EQ(net.parameter_count(), 2u * 3 + 3 + 3 * 2 + 2);
  EXPECT_EQ(net.weight_offset(0), 0u);
  EXPECT_EQ(net.bias_offset(0), 6u);
  EXPECT_EQ(net.weight_offset(1), 9u);
  EXPECT_EQ(net.bias_offset(1), 15u);
  net.weight(1, 2, 1) = 4.0;
  EXPECT_EQ(net.parameters()[9 + 2 * 2 + 1], 4.0);
  EXPECT_THROW(Mlp({3}, Activation::logistic, Activation::logistic), Error);
  EXPECT_THROW(Mlp({3, 0, 1}, Activation::logistic, Activation::logistic), Error);
  EXPECT_THROW(Mlp({3, 2, 1}, Activation::softmax, Activation::softmax), Error);
}

TEST(InitWeights, GlorotBoundsAndZeroBias) {
  const std::vector<std::size_t> sizes{10, 20, 3};
  const Mlp net = init_weights(sizes, 5);
  for (std::size_t l = 0; l < 2; ++l) {
    const double bound = std::sqrt(6.0 / double(sizes[l] + sizes[l + 1]));
    for (std::size_t i = 0; i < sizes[l]; ++i) {
      for (std::size_t j = 0; j < sizes[l + 1]; ++j) EXPECT_LE(std::abs(net.weight(l, i, j)), bound);
    }
    for (std::size_t j = 0; j < sizes[l + 1]; ++j) EXPECT_EQ(net.bias(l, j), 0.0);
  }
  EXPECT_EQ(init_weights(sizes, 5), net);
  EXPECT_NE(init_weights(sizes, 6), net);
}

TEST(Forward, SoftmaxRowsSumToOneAndLogisticInUnitInterval) {
  std::mt19937_64 rng(3);
  const auto x = oracle::random_matrix(16, 4, rng, -5.0, 5.0);
  const Mlp soft = random_net({4, 6, 5}, rng, Activation::elu, Activation::softmax);
  const auto cache = forward(soft, x);
  for (std::size_t r = 0; r < 16; ++r) {
    double sum = 0;
    for (double p : cache.outputs().row(r)) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const Mlp logi = random_net({4, 6, 5}, rng, Activation::logistic, Activation::logistic);
  const auto logi_cache = forward(logi, x);
  for (double v : logi_cache.outputs().flat()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Forward, EluValues) {
  EXPECT_NEAR(elu(-1.0), -0.6321205588285577, 1e-15);
  EXPECT_EQ(elu(2.0), 2.0);
}

TEST(Forward, RejectsWrongWidth) {
  const Mlp net({3, 2}, Activation::logistic, Activation::logistic);
  EXPECT_THROW(forward(net, Matrix<double>(1, 4)), Error);
}

TEST(BackpropStep, HandComputedSingleWeight) {
  // 1-1-1 logistic net, x = 1, hidden weight 0.5, output weight 0.3, target 1.
  Mlp net({1, 1, 1}, Activation::logistic, Activation::logistic);
  net.weight(0, 0, 0) = 0.5;
  net.weight(1, 0, 0) = 0.3;
  const double zeta = 0.1;
  backprop_step(net, Matrix<double>{{1.0}}, Matrix<double>{{1.0}}, zeta);
  // P = logistic(0.5) = 0.6224593312018546, y_hat = logistic(0.3 P) = 0.5465492600977258
  // output: zeta * y_hat (1 - y_hat) (y - y_hat) * P
  // hidden: zeta * y_hat (1 - y_hat) (y - y_hat) * lambda * P (1 - P) * x
  EXPECT_NEAR(net.weight(1, 0, 0) - 0.3, 0.00699520622217137, 1e-15);
  EXPECT_NEAR(net.weight(0, 0, 0) - 0.5, 0.0007922924506498581, 1e-15);
}

TEST(BackpropStep, PerfectTargetsLeaveNetUnchanged) {
  std::mt19937_64 rng(1);
  Mlp net = random_net({2, 3, 2}, rng, Activation::logistic, Activation::logistic);
  const auto x = oracle::random_matrix(5, 2, rng);
  const Matrix<double> target = forward(net, x).outputs();
  const Mlp before = net;
  backprop_step(net, x, target, 0.5);
  EXPECT_EQ(net, before);
}

TEST(BackpropStep, UpdateScalesLinearlyWithLearningRate) {
  std::mt19937_64 rng(2);
  const Mlp base = random_net({2, 3, 2}, rng, Activation::logistic, Activation::logistic);
  const auto x = oracle::random_matrix(4, 2, rng);
  const auto t = random_targets(4, 2, rng);
  std::vector<std::vector<double>> ratios;
  for (double zeta : {1e-3, 1e-4, 1e-5}) {
    Mlp net = base;
    backprop_step(net, x, t, zeta);
    std::vector<double> r;
    for (std::size_t i = 0; i < net.parameter_count(); ++i) {
      r.push_back((net.parameters()[i] - base.parameters()[i]) / zeta);
    }
    ratios.push_back(r);
  }
  for (std::size_t i = 0; i < ratios[0].size(); ++i) {
    EXPECT_NEAR(ratios[1][i], ratios[0][i], 1e-9 + 1e-6 * std::abs(ratios[0][i]));
    EXPECT_NEAR(ratios[2][i], ratios[0][i], 1e-8 + 1e-5 * std::abs(ratios[0][i]));
  }
}

TEST(BackpropStep, RejectsNonFiniteGradient) {
  Mlp net({1, 1}, Activation::logistic, Activation::logistic);
  EXPECT_THROW(backprop_step(net, Matrix<double>{{1.0}}, Matrix<double>{{std::nan("")}}, 0.1), Error);
}

TEST(SquaredErrorGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(20);
  std::uniform_int_distribution<std::size_t> width(1, 4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> sizes{width(rng), width(rng), width(rng)};
    if (trial % 3 == 0) sizes.insert(sizes.begin() + 1, width(rng));
    Mlp net = random_net(sizes, rng, Activation::logistic, Activation::logistic);
    ASSERT_LE(net.parameter_count(), 50u);
    const auto x = oracle::random_matrix(3, sizes.front(), rng);
    const auto t = random_targets(3, sizes.back(), rng);
    const auto analytic = squared_error_gradient(net, x, t).gradient;
    const auto numeric = oracle::finite_difference_gradient(
        net.parameters(), [&] { return mean_squared_error(t, forward(net, x).outputs()); });
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      EXPECT_TRUE(oracle::gradients_agree(analytic[i], numeric[i])) << analytic[i] << " vs " << numeric[i];
    }
  }
}

TEST(Predict, ArgmaxTieGoesToLowestClass) {
  EXPECT_EQ(argmax_rows(Matrix<double>{{0.5, 0.5}, {0.2, 0.7}}), (std::vector<Label>{0, 1}));
}

Dataset two_blobs(std::uint64_t seed, std::size_t per_class = 100) {
  return synthesize(SynthSpec::uniform(2, per_class, 2, 10.0, 1.0, seed));
}

TEST(TrainClassic, ReachesHighTrainingAccuracyOnSeparableData) {
  const Dataset ds = two_blobs(4);
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 50;
  cfg.batch_size = 16;
  const Mlp net = train_classic(ds, {2, 5, 2}, cfg);
  EXPECT_GE(accuracy_of(ds.labels, predict(net, ds.features)), 0.95);
}

TEST(TrainClassic, LossNonIncreasingEarlyOnSeparableData) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Dataset ds = two_blobs(50 + seed);
    ds.features = Standardizer::fit(ds.features).apply(ds.features);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.seed = seed;
    std::vector<EpochRecord> log;
    train_classic(ds, {2, 5, 2}, cfg, &log);
    bool monotone = true;
    for (std::size_t e = 1; e < log.size(); ++e) monotone &= log[e].mean_loss <= log[e - 1].mean_loss;
    good += monotone;
  }
  EXPECT_GE(good, 9);
}

TEST(TrainClassic, InfiniteTargetRunsEveryEpoch) {
  TrainConfig cfg;
  cfg.epochs = 7;
  cfg.target_error = std::numeric_limits<double>::infinity();
  std::vector<EpochRecord> log;
  train_classic(two_blobs(1, 20), {2, 3, 2}, cfg, &log);
  EXPECT_EQ(log.size(), 7u);
}

TEST(TrainClassic, StopsAtTargetError) {
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.target_error = 0.2;
  std::vector<EpochRecord> log;
  train_classic(two_blobs(1, 50), {2, 3, 2}, cfg, &log);
  EXPECT_LT(log.size(), 100u);
  EXPECT_LE(log.back().mean_loss, 0.2);
}

TEST(TrainClassic, RejectsBadConfig) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train_classic(two_blobs(1, 10), {2, 3, 2}, cfg), Error);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train_classic(two_blobs(1, 10), {2, 3, 2}, cfg), Error);
  EXPECT_THROW(train_classic(two_blobs(1, 10), {3, 3, 2}, TrainConfig{}), Error);
}

TEST(TrainClassic, DeterministicPerSeed) {
  const Dataset ds = two_blobs(3, 30);
  TrainConfig cfg;
  cfg.seed = 9;
  EXPECT_EQ(train_classic(ds, {2, 4, 2}, cfg), train_classic(ds, {2, 4, 2}, cfg));
}

TEST(TrainClassic, SingleClassDataPredictsThatClass) {
  Dataset ds = two_blobs(2, 40);
  for (auto& l : ds.labels) l = 1;
  const Mlp net = train_classic(ds, {2, 4, 2}, TrainConfig{});
  std::mt19937_64 rng(0);
  for (auto p : predict(net, oracle::random_matrix(50, 2, rng, -20.0, 20.0))) EXPECT_EQ(p, 1u);
}

TEST(TrainAmnn, SingleCenterEqualsClassicNetwork) {
  const Dataset ds = synthesize(SynthSpec::uniform(3, 40, 2, 10.0, 1.0, 8));
  TrainConfig cfg;
  cfg.seed = 17;
  AmnnConfig amnn;
  amnn.centers = CenterPolicy::fixed(1);
  const AmnnModel model = train_amnn(ds, amnn, {2, 6, 3}, cfg);
  ASSERT_EQ(model.subnets.size(), 1u);
  EXPECT_EQ(model.subnets[0], train_classic(ds, {2, 6, 3}, cfg));
}

TEST(TrainAmnn, BlobPerClassGivesPerfectSubnets) {
  const Dataset ds = synthesize(SynthSpec::uniform(3, 60, 2, 10.0, 1.0, 8));
  AmnnConfig amnn;
  amnn.centers = CenterPolicy::fixed(3);
  std::vector<std::vector<EpochRecord>> logs;
  const AmnnModel model = train_amnn(ds, amnn, {2, 4, 3}, TrainConfig{}, &logs);
  ASSERT_EQ(model.subnets.size(), 3u);
  for (const auto& log : logs) EXPECT_EQ(log.back().train_accuracy, 1.0);
  EXPECT_EQ(accuracy_of(ds.labels, predict(model, ds.features)), 1.0);
}

TEST(TrainAmnn, PredictionUsesRoutedSubnet) {
  const Dataset ds = synthesize(SynthSpec::uniform(3, 30, 2, 10.0, 1.0, 2));
  AmnnConfig amnn;
  amnn.centers = CenterPolicy::fixed(3);
  const AmnnModel model = train_amnn(ds, amnn, {2, 3, 3}, TrainConfig{});
  const auto routes = model.route(ds.features);
  const auto labels = predict(model, ds.features);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(labels[i], predict(model.subnets[routes[i]], ds.features.select_rows(std::vector<std::size_t>{i}))[0]);
  }
  EXPECT_EQ(labels, predict(model, ds.features));
}

}  // namespace
}  // namespace amnn
