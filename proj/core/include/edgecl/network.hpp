#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edgecl/descriptor.hpp"
#include "edgecl/layer.hpp"

namespace edgecl::nn {

// Sequential network with a latent-replay cut: layers [0, lr_cut) are
// frozen, layers [lr_cut, size) are retrained. The last layer is the
// softmax_xent head.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers, std::size_t lr_cut = 0);

  // He-normal coefficients, zero biases, unit batch-renorm gain.
  static Network from_descriptor(const NetworkDescriptor& descriptor, std::uint64_t seed);

  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return layers_.at(i); }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  std::span<Layer> layers() noexcept { return layers_; }
  std::span<const Layer> layers() const noexcept { return layers_; }

  std::size_t lr_cut() const noexcept { return lr_cut_; }
  void set_lr_cut(std::size_t cut);

  const Shape& input_shape() const { return layers_.front().spec().in_shape; }
  // Per-sample shape of the replay vectors: the input of layer lr_cut.
  const Shape& latent_shape() const { return layers_.at(lr_cut_).spec().in_shape; }
  std::size_t classes() const { return element_count(layers_.back().spec().out_shape); }

  // Runs layers [begin, end). Training mode records tapes.
  Tensor forward(const Tensor& act_in, std::size_t begin, std::size_t end, Mode mode, ExecConfig exec = {});
  // Full inference pass to logits.
  Tensor predict_logits(const Tensor& images, ExecConfig exec = {});

  void clear_tapes() noexcept;

 private:
  std::vector<Layer> layers_;
  std::size_t lr_cut_ = 0;
};

// Stacks per-sample tensors (each matching `sample_shape`) into N x sample_shape.
Tensor stack_samples(std::span<const std::span<const float>> samples, const Shape& sample_shape);
Shape batched(const Shape& sample_shape, std::size_t batch);

}  // namespace edgecl::nn
