#pragma once

#include <cstddef>

#include "edgecl/layer_spec.hpp"
#include "edgecl/tensor.hpp"

namespace edgecl::nn {

struct ExecConfig {
  std::size_t workers = 1;
  // Output filters per coefficient tile (C_TILE); 0 processes all of C_out at once.
  std::size_t c_tile = 0;
};

struct ParamGrads {
  Tensor weight;
  Tensor bias;
};

// GEMM-lowered kernels for conv, depthwise, pointwise and fully-connected
// layers. Activations are N x C x H x W. Tiling splits the work along C_out
// only; reduction order per output element is unchanged, so tiled and
// untiled runs are bit-identical.

// act_out = coeff * im2col(act_in) + bias
Tensor conv_forward(const LayerSpec& spec, const Tensor& act_in, const Tensor& weight, const Tensor& bias,
                    ExecConfig exec = {});

// err_out = flip_coeff(coeff) * transposed_im2col(err_in)
Tensor conv_backward_error(const LayerSpec& spec, const Tensor& err_in, const Tensor& weight,
                           ExecConfig exec = {});

// grad = sum over the batch of err_in * im2col(act_in)^T; bias grad is the
// per-channel sum of err_in. Bias grad is empty when the layer has no bias.
ParamGrads conv_backward_grad(const LayerSpec& spec, const Tensor& act_in, const Tensor& err_in,
                              ExecConfig exec = {});

}  // namespace edgecl::nn
