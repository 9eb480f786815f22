#include "edgecl/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "edgecl/errors.hpp"

namespace edgecl::nn {

Network::Network(std::vector<Layer> layers, std::size_t lr_cut) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i].spec().in_shape != layers_[i - 1].spec().out_shape) {
      throw ConfigError("layer '" + layers_[i].spec().name + "' does not chain from '" +
                        layers_[i - 1].spec().name + "'");
    }
  }
  set_lr_cut(lr_cut);
}

Network Network::from_descriptor(const NetworkDescriptor& descriptor, std::uint64_t seed) {
  descriptor.validate();
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  layers.reserve(descriptor.layers.size());
  for (const LayerSpec& spec : descriptor.layers) {
    Layer layer(spec);
    if (is_gemm_kind(spec.kind)) {
      const double fan_in = static_cast<double>(spec.geom.patch_size());
      std::normal_distribution<float> dist(0.0f, static_cast<float>(std::sqrt(2.0 / fan_in)));
      for (float& w : layer.weight().values()) w = dist(rng);
    }
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers), 0);
}

void Network::set_lr_cut(std::size_t cut) {
  if (cut >= layers_.size()) {
    throw ConfigError("cut index " + std::to_string(cut) + " outside a " + std::to_string(layers_.size()) +
                      "-layer network");
  }
  lr_cut_ = cut;
}

Tensor Network::forward(const Tensor& act_in, std::size_t begin, std::size_t end, Mode mode, ExecConfig exec) {
  if (begin > end || end > layers_.size()) throw ArgumentError("invalid layer range");
  Tensor x = act_in;
  for (std::size_t i = begin; i < end; ++i) x = layers_[i].forward(x, mode, exec);
  return x;
}

Tensor Network::predict_logits(const Tensor& images, ExecConfig exec) {
  return forward(images, 0, layers_.size(), Mode::kInference, exec);
}

void Network::clear_tapes() noexcept {
  for (Layer& layer : layers_) layer.clear_tape();
}

Shape batched(const Shape& sample_shape, std::size_t batch) {
  Shape dims{batch};
  dims.insert(dims.end(), sample_shape.begin(), sample_shape.end());
  return dims;
}

Tensor stack_samples(std::span<const std::span<const float>> samples, const Shape& sample_shape) {
  const std::size_t stride = element_count(sample_shape);
  Tensor out(batched(sample_shape, samples.size()));
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (samples[n].size() != stride) {
      throw ShapeError("sample " + std::to_string(n) + " does not match " + to_string(sample_shape));
    }
    std::copy(samples[n].begin(), samples[n].end(), out.data() + n * stride);
  }
  return out;
}

}  // namespace edgecl::nn
