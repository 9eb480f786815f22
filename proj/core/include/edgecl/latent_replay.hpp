#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "edgecl/ar1.hpp"
#include "edgecl/network.hpp"
#include "edgecl/replay_buffer.hpp"
#include "edgecl/tensor.hpp"

namespace edgecl::replay {

// Per-epoch sample mix for one learning step. The defaults keep the usual
// 1:5 new-to-replay ratio.
struct CLBatchPlan {
  std::size_t n_new = 300;
  std::size_t n_replay = 1500;
  std::size_t epochs = 8;

  std::size_t samples_per_epoch() const noexcept { return n_new + n_replay; }
};

// One entry of an epoch stream: either a new latent (by index into the new
// set) or a stored replay vector (class, index within class).
struct SampleRef {
  bool replay = false;
  std::uint32_t class_id = 0;
  std::size_t index = 0;

  bool operator==(const SampleRef&) const = default;
};

using EpochStream = std::vector<SampleRef>;

// Forward activations at layer `cut` for N x input_shape images, computed in
// inference mode. cut = 0 returns the images unchanged.
Tensor generate_latents(nn::Network& net, const Tensor& images, std::size_t cut, nn::ExecConfig exec = {});

// One shuffled stream per epoch holding every new latent once and
// plan.n_replay replay vectors. Replay draws are spread evenly over the
// stored classes (the remainder goes to a seeded choice of classes) and
// drawn without replacement within a class, reshuffling only when a class
// has fewer vectors than its share. Pure in (buffer, labels, plan, seed).
std::vector<EpochStream> compose_batches(const ReplayBuffer& buffer, std::span<const std::uint32_t> new_labels,
                                         const CLBatchPlan& plan, std::uint64_t seed);

// Materialises a slice of an epoch stream as an N x latent batch plus labels.
std::pair<Tensor, std::vector<std::uint32_t>> gather_batch(const ReplayBuffer& buffer, const Tensor& new_latents,
                                                           std::span<const std::uint32_t> new_labels,
                                                           std::span<const SampleRef> refs);

struct LearnOptions {
  std::size_t n_replay = 1500;
  std::uint64_t seed = 0;
  nn::ExecConfig exec{};
};

struct LearnMetrics {
  std::size_t new_samples = 0;
  std::size_t replay_samples = 0;
  std::size_t presentations = 0;   // samples pushed through train_batch, all epochs
  std::vector<double> epoch_loss;  // sample-weighted mean per epoch
};

// Latents for the new images at net.lr_cut(), cfg.epochs of mixed replay
// training on the layers above the cut, then the new latents are inserted
// into the buffer (grouped by label). Layers below the cut are untouched.
LearnMetrics learn_new_class(nn::Network& net, ReplayBuffer& buffer, const Tensor& images,
                             std::span<const std::uint32_t> labels, const ar1::TrainConfig& cfg,
                             ar1::FisherBank& fisher, const LearnOptions& options = {});

}  // namespace edgecl::replay
