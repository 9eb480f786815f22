#pragma once

#include <cstdint>
#include <span>

#include "edgecl/tensor.hpp"

namespace edgecl::nn {

Tensor relu_forward(const Tensor& act_in);
// Passes err where the saved input was strictly positive.
Tensor relu_backward(const Tensor& err_in, const Tensor& act_in);

// Global average pool: N x C x H x W -> N x C x 1 x 1.
Tensor avg_pool_forward(const Tensor& act_in);
Tensor avg_pool_backward(const Tensor& err_in, const Shape& in_dims);

struct LossResult {
  double loss = 0.0;  // mean over the batch
  Tensor err;         // d loss / d logits, same dims as the logits
};

// Softmax cross-entropy over N x K (or N x K x 1 x 1) logits. Per sample,
// loss = -log softmax(logits)[label] and err = softmax(logits) - onehot(label);
// both are averaged over the batch. Max-subtraction keeps exp() finite.
LossResult softmax_xent(const Tensor& logits, std::span<const std::uint32_t> labels);

// Row-wise argmax of N x K logits.
std::vector<std::uint32_t> argmax_rows(const Tensor& logits);

}  // namespace edgecl::nn
