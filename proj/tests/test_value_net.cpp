#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "agvpick/value_net.hpp"

using namespace agvpick;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("agvpick_" + name)).string();
}

double finite_difference(const ValueNet& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int i) {
  const double h = 1e-6;
  ValueNet plus = net, minus = net;
  plus.parameters()[i] += h;
  minus.parameters()[i] -= h;
  return (plus.loss_and_gradient(x, y, nullptr) - minus.loss_and_gradient(x, y, nullptr)) / (2 * h);
}

}  // namespace

TEST(ValueNet, ParameterCount) {
  EXPECT_EQ(NetArchitecture{}.parameter_count(), 12 * 64 + 64 + 64 * 64 + 64 + 64 + 1);
  const NetArchitecture tiny{3, {4, 3}, Activation::Tanh};
  EXPECT_EQ(ValueNet(tiny).parameter_count(), 35);
}

TEST(ValueNet, ZeroNetScoresZero) {
  const ValueNet net;
  EXPECT_EQ(net.score(Eigen::VectorXd::Random(12)), 0.0);
  EXPECT_TRUE(net.all_finite());
}

TEST(ValueNet, BatchScoresMatchSingleScores) {
  const ValueNet net = ValueNet::random(NetArchitecture{}, 3);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(12, 7);
  const Eigen::VectorXd batch = net.score_batch(x);
  for (int c = 0; c < 7; ++c) EXPECT_DOUBLE_EQ(batch[c], net.score(x.col(c)));
}

TEST(ValueNet, RandomInitIsSeeded) {
  EXPECT_EQ(ValueNet::random(NetArchitecture{}, 9).parameters(), ValueNet::random(NetArchitecture{}, 9).parameters());
  EXPECT_NE(ValueNet::random(NetArchitecture{}, 9).parameters(), ValueNet::random(NetArchitecture{}, 10).parameters());
}

TEST(ValueNet, GradientMatchesFiniteDifferencesInEveryLayer) {
  const NetArchitecture tiny{3, {4, 3}, Activation::Tanh};
  ValueNet net = ValueNet::random(tiny, 5, 10.0);
  net.parameters() += 0.1 * Eigen::VectorXd::Random(net.parameter_count());  // nonzero biases
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 6);
  const Eigen::VectorXd y = 5.0 * Eigen::VectorXd::Random(6);
  Eigen::VectorXd grad;
  net.loss_and_gradient(x, y, &grad);
  ASSERT_EQ(grad.size(), net.parameter_count());
  for (int i = 0; i < net.parameter_count(); ++i) {
    const double fd = finite_difference(net, x, y, i);
    const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
    EXPECT_LT(std::abs(fd - grad[i]) / denom, 1e-4) << "parameter " << i;
  }
}

TEST(ValueNet, SoftUpdate) {
  const ValueNet a = ValueNet::random(NetArchitecture{}, 1);
  ValueNet b = ValueNet::random(NetArchitecture{}, 2);
  ValueNet copy = b;
  copy.soft_update_from(a, 1.0);
  EXPECT_EQ(copy.parameters(), a.parameters());

  const double gap = (a.parameters() - b.parameters()).norm();
  ValueNet once = b;
  once.soft_update_from(a, 0.001);
  EXPECT_LE((once.parameters() - b.parameters()).norm(), 0.001 * gap * (1 + 1e-12));
  ValueNet twice = once;
  twice.soft_update_from(a, 0.001);
  const Eigen::VectorXd expected = b.parameters() + (1 - 0.999 * 0.999) * (a.parameters() - b.parameters());
  EXPECT_LT((twice.parameters() - expected).norm(), 1e-12 * (1 + gap));
}

TEST(ValueNet, AdamStepIsDeterministicAndDescends) {
  const NetArchitecture tiny{3, {4}, Activation::Tanh};
  ValueNet net = ValueNet::random(tiny, 4, 1.0);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 16);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(16, 0.3);
  Adam adam(net.parameter_count(), 1e-2);
  const double start = net.loss_and_gradient(x, y, nullptr);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd g;
    net.loss_and_gradient(x, y, &g);
    adam.step(net.parameters(), g);
  }
  EXPECT_LT(net.loss_and_gradient(x, y, nullptr), start);
  EXPECT_EQ(adam.steps(), 200);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  ValueNet net = ValueNet::random(NetArchitecture{}, 77);
  net.set_normalization({1.0, 2.5, 15.0});
  const std::string path = temp_path("roundtrip.bin");
  save_checkpoint(net, path);
  const ValueNet back = load_checkpoint(path, NetArchitecture{});
  EXPECT_EQ(back.parameters(), net.parameters());
  EXPECT_EQ(back.normalization(), net.normalization());
  EXPECT_EQ(back.value_scale(), net.value_scale());
  std::mt19937 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = Eigen::VectorXd::Random(12);
    EXPECT_EQ(back.score(x), net.score(x));
  }
  std::remove(path.c_str());
}

TEST(Checkpoint, ZeroNetRestoresZeros) {
  const std::string path = temp_path("zero.bin");
  save_checkpoint(ValueNet{}, path);
  EXPECT_TRUE(load_checkpoint(path).parameters().isZero(0.0));
  std::remove(path.c_str());
}

TEST(Checkpoint, WrongArchitectureIsRejected) {
  const std::string path = temp_path("arch.bin");
  save_checkpoint(ValueNet{}, path);
  EXPECT_THROW(load_checkpoint(path, NetArchitecture{12, {32, 32}, Activation::Tanh}), CheckpointError);
  std::remove(path.c_str());
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  const std::string path = temp_path("corrupt.bin");
  save_checkpoint(ValueNet{}, path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  const auto write = [&](const std::string& b) { std::ofstream(path, std::ios::binary) << b; };

  write(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  write("XXXXXXXX" + bytes.substr(8));
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  std::string version = bytes;
  version[8] = 9;
  write(version);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  write(bytes + "junk");
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  EXPECT_THROW(load_checkpoint(temp_path("missing.bin")), CheckpointError);
  std::remove(path.c_str());
}
