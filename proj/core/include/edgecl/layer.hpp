#pragma once

#include <optional>

#include "edgecl/batch_renorm.hpp"
#include "edgecl/conv.hpp"
#include "edgecl/layer_spec.hpp"
#include "edgecl/tensor.hpp"

namespace edgecl::nn {

enum class Mode {
  kInference,  // frozen: no tape, running statistics untouched
  kTraining,   // records the tape and updates batch-renorm running statistics
};

// Values a training-mode forward pass keeps for the backward passes.
struct LayerTape {
  Tensor act_in;
  RenormCache renorm;
};

// A layer together with its coefficients, running statistics and tape.
// The softmax_xent layer is the network head: forward passes logits
// through unchanged and the loss gradient is injected by the trainer.
class Layer {
 public:
  explicit Layer(LayerSpec spec);

  const LayerSpec& spec() const noexcept { return spec_; }
  bool trainable() const noexcept { return spec_.param_count() > 0; }

  Tensor& weight() noexcept { return weight_; }
  const Tensor& weight() const noexcept { return weight_; }
  Tensor& bias() noexcept { return bias_; }
  const Tensor& bias() const noexcept { return bias_; }
  RenormStats& running_stats() noexcept { return stats_; }
  const RenormStats& running_stats() const noexcept { return stats_; }

  Tensor forward(const Tensor& act_in, Mode mode, ExecConfig exec = {});

  // err_in has the output shape; returns the error w.r.t. the layer input.
  // Throws StateError if the layer needs a tape and none was recorded.
  Tensor backward_error(const Tensor& err_in, ExecConfig exec = {}) const;

  // Throws StateError without a tape, ArgumentError for parameter-free layers.
  ParamGrads backward_grad(const Tensor& err_in, ExecConfig exec = {}) const;

  bool has_tape() const noexcept { return tape_.has_value(); }
  const LayerTape& tape() const;
  void clear_tape() noexcept { tape_.reset(); }

 private:
  void check_input(const Tensor& act_in) const;

  LayerSpec spec_;
  Tensor weight_;
  Tensor bias_;
  RenormStats stats_;
  std::optional<LayerTape> tape_;
};

}  // namespace edgecl::nn
