#pragma once

#include <vector>

#include "edgecl/conv.hpp"
#include "edgecl/layer_spec.hpp"
#include "edgecl/tensor.hpp"

namespace edgecl::nn {

struct RenormStats {
  std::vector<float> mean;
  std::vector<float> var;

  static RenormStats identity(std::size_t channels);
};

// Per-channel values saved by a training-mode forward pass. r and d are
// treated as constants by the backward pass.
struct RenormCache {
  Tensor normalized;  // (x - batch_mean) / batch_std
  std::vector<float> batch_std;
  std::vector<float> r;
  std::vector<float> d;
};

// Training mode: y = gamma * (x_hat * r + d) + beta over per-channel batch
// statistics (N*H*W elements per channel), then the running statistics move
// toward the batch statistics by config.momentum.
// A null cache in training mode discards the backward state.
// Inference mode (training == false):
// y = gamma * (x - running_mean) / running_std + beta.
Tensor batch_renorm_forward(const Tensor& act_in, const Tensor& gamma, const Tensor& beta, RenormStats& running,
                            const RenormConfig& config, bool training, RenormCache* cache);

Tensor batch_renorm_backward_error(const Tensor& err_in, const Tensor& gamma, const RenormCache& cache);

// weight = d/d gamma, bias = d/d beta.
ParamGrads batch_renorm_backward_grad(const Tensor& err_in, const RenormCache& cache);

}  // namespace edgecl::nn
