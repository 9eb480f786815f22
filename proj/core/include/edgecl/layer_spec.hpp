#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "edgecl/im2col.hpp"
#include "edgecl/tensor.hpp"

namespace edgecl::nn {

enum class LayerKind {
  kConv,
  kDepthwise,
  kPointwise,
  kFullyConnected,
  kAvgPool,
  kRelu,
  kBatchRenorm,
  kSoftmaxXent,
};

std::string_view to_string(LayerKind kind);
using edgecl::to_string;
// Accepts the descriptor spellings (conv, depthwise, pointwise,
// fully_connected, avg_pool, relu, batch_renorm, softmax_xent).
LayerKind parse_layer_kind(std::string_view text);

// Kinds lowered to GEMM (carry a ConvGeometry and coefficients).
bool is_gemm_kind(LayerKind kind) noexcept;

// Batch Renormalization constants. r and d are clipped to [1/r_max, r_max]
// and [-d_max, d_max]; running statistics move by `momentum` per batch.
struct RenormConfig {
  float r_max = 3.0f;
  float d_max = 5.0f;
  float epsilon = 1e-5f;
  float momentum = 0.01f;

  friend bool operator==(const RenormConfig&, const RenormConfig&) = default;
};

// One layer of a network. Shapes are per sample (C x H x W); the batch axis
// is implicit. Fully-connected layers flatten their input and produce
// Out x 1 x 1.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kRelu;
  ConvGeometry geom;
  bool bias = false;
  Shape in_shape;
  Shape out_shape;
  RenormConfig renorm;

  std::size_t weight_count() const;
  std::size_t bias_count() const;
  // N_w(i): weights plus biases (gamma/beta for batch renorm).
  std::size_t param_count() const { return weight_count() + bias_count(); }
  Shape weight_dims() const;

  // Elements of the im2col scratch matrix for one sample (0 when the layer
  // reads its input in place).
  std::size_t im2col_elements() const;

  // Checks out_shape against geometry and in_shape; throws ConfigError.
  void validate() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

LayerSpec make_conv(std::string name, const Shape& in_shape, std::size_t c_out, std::size_t kernel,
                    std::size_t stride = 1, std::size_t padding = 0, bool bias = false);
LayerSpec make_depthwise(std::string name, const Shape& in_shape, std::size_t kernel, std::size_t stride = 1,
                         std::size_t padding = 0, bool bias = false);
LayerSpec make_pointwise(std::string name, const Shape& in_shape, std::size_t c_out, bool bias = false);
LayerSpec make_fully_connected(std::string name, const Shape& in_shape, std::size_t out_features,
                               bool bias = true);
LayerSpec make_avg_pool(std::string name, const Shape& in_shape);
LayerSpec make_relu(std::string name, const Shape& in_shape);
LayerSpec make_batch_renorm(std::string name, const Shape& in_shape, RenormConfig config = {});
LayerSpec make_softmax_xent(std::string name, const Shape& in_shape);

}  // namespace edgecl::nn
