#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>

#include "edgecl/network.hpp"
#include "edgecl/tensor.hpp"

namespace edgecl::ar1 {

// None of these defaults come from a measured setup; they are exposed so
// experiments can override them.
struct TrainConfig {
  float learning_rate = 0.01f;
  std::size_t epochs = 8;
  std::size_t batch_size = 32;
  // f <- decay * f + (1 - decay) * grad^2
  float fisher_decay = 0.9f;
  // Importance ceiling; parameters at the ceiling are frozen.
  float fisher_clip = 1e-3f;

  void validate() const;
};

// Diagonal empirical-Fisher importance for one parameter tensor.
struct FisherState {
  Tensor f;
  float f_max_clip = 1e-3f;

  static FisherState zeros(const Shape& dims, float clip);
};

// Decayed mean of squared gradients, clipped elementwise to f_max_clip.
FisherState fisher_accumulate(FisherState state, const Tensor& grad, float decay);

// params - lr * (1 - f / f_max_clip) * grad. The scale lies in [0, 1]: f = 0
// is a plain SGD step and f at the ceiling leaves the parameter untouched.
Tensor ar1_step(Tensor params, const Tensor& grad, const FisherState& state, float learning_rate);

enum class ParamSlot { kWeight, kBias };

// Fisher state for every retrained parameter tensor, keyed by layer index.
class FisherBank {
 public:
  // Creates a zero state on first use.
  FisherState& state(std::size_t layer, ParamSlot slot, const Shape& dims, float clip);
  const FisherState* find(std::size_t layer, ParamSlot slot) const;
  // N_Fi: total tracked elements.
  std::size_t element_total() const;
  void clear() noexcept { states_.clear(); }

 private:
  std::map<std::pair<std::size_t, ParamSlot>, FisherState> states_;
};

// One mini-batch on layers [lr_cut, end): forward from the cut, softmax
// cross-entropy, backward to the cut, then fisher_accumulate and ar1_step
// for every trainable tensor. `latents` is N x latent_shape. Returns the
// mean batch loss.
double train_batch(nn::Network& net, const Tensor& latents, std::span<const std::uint32_t> labels,
                   const TrainConfig& cfg, FisherBank& fisher, nn::ExecConfig exec = {});

}  // namespace edgecl::ar1
