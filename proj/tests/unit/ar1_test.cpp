#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "edgecl/activations.hpp"
#include "edgecl/ar1.hpp"
#include "edgecl/descriptor.hpp"
#include "edgecl/errors.hpp"
#include "edgecl/network.hpp"
#include "oracles.hpp"

namespace edgecl::ar1 {
namespace {

using testing::random_tensor;

FisherState state_with(Tensor f, float clip) { return {std::move(f), clip}; }

TEST(FisherAccumulate, ZeroGradientDecaysState) {
  std::mt19937_64 rng(1);
  const Tensor f = random_tensor({4, 3}, rng, 0.0f, 1e-3f);
  const FisherState out = fisher_accumulate(state_with(f, 1e-3f), Tensor({4, 3}), 0.9f);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_FLOAT_EQ(out.f[i], 0.9f * f[i]);
}

TEST(FisherAccumulate, NoDecayStoresSquaredGradient) {
  std::mt19937_64 rng(2);
  const Tensor g = random_tensor({7}, rng);
  const FisherState out = fisher_accumulate(FisherState::zeros({7}, 10.0f), g, 0.0f);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(out.f[i], g[i] * g[i]);
}

TEST(FisherAccumulate, ConstantGradientReachesClippedFixpoint) {
  // Geometric series: after n steps f = (1 - decay^n) g^2, capped at the clip.
  const std::vector<float> g_values{0.01f, 0.02f, 0.05f, 0.5f};
  const float clip = 1e-3f;
  Tensor g({4}, g_values);
  FisherState s = FisherState::zeros({4}, clip);
  for (int n = 1; n <= 200; ++n) {
    s = fisher_accumulate(std::move(s), g, 0.9f);
    if (n == 5) {
      const double expected = (1.0 - std::pow(0.9, 5)) * 0.01 * 0.01;
      EXPECT_NEAR(s.f[0], expected, 1e-9);
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double fix = std::min(static_cast<double>(g_values[i]) * g_values[i], static_cast<double>(clip));
    EXPECT_NEAR(s.f[i], fix, 1e-7) << i;
    EXPECT_LE(s.f[i], clip);
  }
}

TEST(FisherAccumulate, ShapeMismatchThrows) {
  EXPECT_THROW(fisher_accumulate(FisherState::zeros({3}, 1.0f), Tensor({4}), 0.5f), ShapeError);
}

TEST(Ar1Step, ZeroImportanceIsPlainSgd) {
  std::mt19937_64 rng(3);
  const Tensor p = random_tensor({5, 5}, rng);
  const Tensor g = random_tensor({5, 5}, rng);
  const Tensor out = ar1_step(p, g, FisherState::zeros({5, 5}, 1e-3f), 0.1f);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(out[i], p[i] - 0.1f * g[i]);
}

TEST(Ar1Step, ImportanceAtCeilingFreezes) {
  std::mt19937_64 rng(4);
  const Tensor p = random_tensor({6}, rng);
  Tensor f({6});
  f.fill(1e-3f);
  const Tensor out = ar1_step(p, random_tensor({6}, rng), state_with(f, 1e-3f), 0.5f);
  EXPECT_TRUE(bitwise_equal(out, p));
}

TEST(Ar1Step, HalfCeilingMovesHalfAStep) {
  std::mt19937_64 rng(5);
  const Tensor p = random_tensor({8}, rng);
  const Tensor g = random_tensor({8}, rng);
  Tensor f({8});
  for (std::size_t i = 0; i < 8; ++i) f[i] = (i % 2 == 0) ? 0.5e-3f : 0.0f;
  const Tensor out = ar1_step(p, g, state_with(f, 1e-3f), 0.2f);
  for (std::size_t i = 0; i < 8; ++i) {
    const double full = 0.2 * g[i];
    const double moved = static_cast<double>(p[i]) - out[i];
    EXPECT_NEAR(moved, i % 2 == 0 ? full / 2 : full, 1e-6) << i;
  }
}

TEST(Ar1Step, StepNeverExceedsSgdStep) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const float clip = testing::uniform(rng, 1, 100) * 1e-4f;
    const Tensor p = random_tensor({16}, rng);
    const Tensor g = random_tensor({16}, rng, -3.0f, 3.0f);
    // Includes f above the clip, which must still clamp to a zero step.
    const Tensor f = random_tensor({16}, rng, 0.0f, 1.5f * clip);
    const float lr = 0.05f;
    const Tensor out = ar1_step(p, g, state_with(f, clip), lr);
    for (std::size_t i = 0; i < 16; ++i) {
      EXPECT_LE(std::fabs(out[i] - p[i]), lr * std::fabs(g[i]) * (1.0f + 1e-6f) + 1e-7f);
    }
  }
}

TEST(Ar1Step, UniformImportanceEqualsRescaledSgd) {
  std::mt19937_64 rng(7);
  const Tensor p = random_tensor({4, 4}, rng);
  const Tensor g = random_tensor({4, 4}, rng);
  const float clip = 2e-3f;
  Tensor f({4, 4});
  f.fill(0.5e-3f);
  const float lr = 0.3f;
  const Tensor out = ar1_step(p, g, state_with(f, clip), lr);
  const float rescaled = lr * (1.0f - 0.5e-3f / clip);
  const Tensor sgd = ar1_step(p, g, FisherState::zeros({4, 4}, clip), rescaled);
  EXPECT_TRUE(bitwise_equal(out, sgd));
}

TEST(Ar1Step, ShapeMismatchThrows) {
  EXPECT_THROW(ar1_step(Tensor({3}), Tensor({3}), FisherState::zeros({4}, 1.0f), 0.1f), ShapeError);
}

TEST(TrainConfig, RejectsInvalidValues) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.fisher_decay = 1.5f;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.fisher_clip = 0.0f;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = -1.0f;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

// 4 -> fc 5 -> relu -> fc 3 -> loss, cut at the first FC.
nn::Network toy_net(std::uint64_t seed) {
  const NetworkDescriptor d = DescriptorBuilder("toy", {4, 1, 1})
                                  .fully_connected("fc1", 5)
                                  .relu("fc1/relu")
                                  .fully_connected("fc2", 3)
                                  .softmax_xent("loss")
                                  .build();
  nn::Network net = nn::Network::from_descriptor(d, seed);
  std::mt19937_64 rng(seed);
  for (nn::Layer& layer : net.layers()) {
    if (!layer.bias().empty()) layer.bias() = random_tensor(layer.bias().dims(), rng, -0.2f, 0.2f);
  }
  return net;
}

// 4 -> fc 3 -> loss: convex in the parameters.
nn::Network linear_net(std::uint64_t seed) {
  const NetworkDescriptor d =
      DescriptorBuilder("linear", {4, 1, 1}).fully_connected("fc", 3).softmax_xent("loss").build();
  return nn::Network::from_descriptor(d, seed);
}

double batch_loss(nn::Network& net, const Tensor& x, std::span<const std::uint32_t> labels) {
  return nn::softmax_xent(net.forward(x, net.lr_cut(), net.size(), nn::Mode::kInference), labels).loss;
}

TEST(TrainBatch, ZeroLearningRateLeavesParametersAndReturnsLoss) {
  nn::Network net = toy_net(8);
  std::mt19937_64 rng(8);
  const Tensor x = random_tensor({1, 4, 1, 1}, rng);
  const std::vector<std::uint32_t> y{2};
  const Tensor w0 = net.layer(0).weight();
  const Tensor w2 = net.layer(2).weight();
  const double expected = batch_loss(net, x, y);
  FisherBank fisher;
  const double loss = train_batch(net, x, y, {0.0f, 1, 1, 0.9f, 1e-3f}, fisher);
  EXPECT_DOUBLE_EQ(loss, expected);
  EXPECT_TRUE(bitwise_equal(net.layer(0).weight(), w0));
  EXPECT_TRUE(bitwise_equal(net.layer(2).weight(), w2));
  EXPECT_EQ(fisher.element_total(), 4u * 5 + 5 + 5 * 3 + 3);
}

TEST(TrainBatch, RepeatedBatchDoesNotIncreaseConvexLoss) {
  nn::Network net = linear_net(9);
  std::mt19937_64 rng(9);
  const Tensor x = random_tensor({6, 4, 1, 1}, rng);
  const std::vector<std::uint32_t> y{0, 1, 2, 0, 1, 2};
  FisherBank fisher;
  const TrainConfig cfg{0.1f, 1, 6, 0.9f, 1e-3f};
  double previous = train_batch(net, x, y, cfg, fisher);
  for (int i = 0; i < 5; ++i) {
    const double loss = train_batch(net, x, y, cfg, fisher);
    EXPECT_LE(loss, previous + 1e-9) << i;
    previous = loss;
  }
}

TEST(TrainBatch, UpdateMatchesFiniteDifferenceGradient) {
  // With decay 1 the importance stays zero, so delta = -lr * grad exactly.
  nn::Network net = toy_net(10);
  std::mt19937_64 rng(10);
  const Tensor x = random_tensor({3, 4, 1, 1}, rng);
  const std::vector<std::uint32_t> y{0, 2, 1};
  const float lr = 1e-3f;

  nn::Network probe = net;
  std::vector<Tensor> numeric;
  for (std::size_t layer : {std::size_t{0}, std::size_t{2}}) {
    for (bool bias : {false, true}) {
      Tensor& target = bias ? probe.layer(layer).bias() : probe.layer(layer).weight();
      numeric.push_back(testing::numeric_gradient(
          target,
          [&](const Tensor& p) {
            const Tensor saved = target;
            target = p;
            const double l = batch_loss(probe, x, y);
            target = saved;
            return l;
          },
          1e-3f));
    }
  }

  nn::Network trained = net;
  FisherBank fisher;
  train_batch(trained, x, y, {lr, 1, 3, 1.0f, 1e-3f}, fisher);
  std::size_t k = 0;
  for (std::size_t layer : {std::size_t{0}, std::size_t{2}}) {
    for (bool bias : {false, true}) {
      const Tensor& before = bias ? net.layer(layer).bias() : net.layer(layer).weight();
      const Tensor& after = bias ? trained.layer(layer).bias() : trained.layer(layer).weight();
      Tensor analytic(before.dims());
      for (std::size_t i = 0; i < before.size(); ++i) {
        analytic[i] = static_cast<float>((static_cast<double>(before[i]) - after[i]) / lr);
      }
      EXPECT_LE(testing::norm_relative_error(analytic, numeric[k++]), 1e-2) << layer << (bias ? " bias" : " weight");
    }
  }
}

TEST(TrainBatch, DecayOneIsPlainMiniBatchSgd) {
  nn::Network ar1_net = linear_net(11);
  nn::Network sgd_net = ar1_net;
  std::mt19937_64 rng(11);
  const float lr = 0.05f;
  FisherBank fisher;
  for (int step = 0; step < 10; ++step) {
    const Tensor x = random_tensor({4, 4, 1, 1}, rng);
    const std::vector<std::uint32_t> y{static_cast<std::uint32_t>(step % 3), 0, 1, 2};
    train_batch(ar1_net, x, y, {lr, 1, 4, 1.0f, 1e-3f}, fisher);

    const Tensor logits = sgd_net.forward(x, 0, sgd_net.size(), nn::Mode::kTraining);
    const nn::LossResult loss = nn::softmax_xent(logits, y);
    const nn::ParamGrads g = sgd_net.layer(0).backward_grad(loss.err);
    for (std::size_t i = 0; i < g.weight.size(); ++i) sgd_net.layer(0).weight()[i] -= lr * g.weight[i];
    for (std::size_t i = 0; i < g.bias.size(); ++i) sgd_net.layer(0).bias()[i] -= lr * g.bias[i];
    sgd_net.clear_tapes();
  }
  EXPECT_TRUE(bitwise_equal(ar1_net.layer(0).weight(), sgd_net.layer(0).weight()));
  EXPECT_TRUE(bitwise_equal(ar1_net.layer(0).bias(), sgd_net.layer(0).bias()));
}

TEST(TrainBatch, OnlyLayersAboveTheCutMove) {
  nn::Network net = toy_net(12);
  net.set_lr_cut(2);
  std::mt19937_64 rng(12);
  const Tensor x = random_tensor({2, 4, 1, 1}, rng);
  const Tensor latents = net.forward(x, 0, 2, nn::Mode::kInference);
  const Tensor w0 = net.layer(0).weight();
  const Tensor w2 = net.layer(2).weight();
  FisherBank fisher;
  const std::vector<std::uint32_t> y{1, 0};
  train_batch(net, latents, y, {0.1f, 1, 2, 0.9f, 1.0f}, fisher);
  EXPECT_TRUE(bitwise_equal(net.layer(0).weight(), w0));
  EXPECT_FALSE(bitwise_equal(net.layer(2).weight(), w2));
  EXPECT_EQ(fisher.find(0, ParamSlot::kWeight), nullptr);
  EXPECT_NE(fisher.find(2, ParamSlot::kWeight), nullptr);
}

TEST(TrainBatch, WrongLatentShapeIsConfigError) {
  nn::Network net = toy_net(13);
  net.set_lr_cut(2);
  FisherBank fisher;
  const std::vector<std::uint32_t> y{0};
  EXPECT_THROW(train_batch(net, Tensor({1, 4, 1, 1}), y, {}, fisher), ConfigError);
}

}  // namespace
}  // namespace edgecl::ar1
