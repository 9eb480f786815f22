#include "edgecl/layer.hpp"

#include <utility>

#include "edgecl/activations.hpp"
#include "edgecl/errors.hpp"

namespace edgecl::nn {

Layer::Layer(LayerSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (is_gemm_kind(spec_.kind)) {
    weight_ = Tensor(spec_.weight_dims());
    if (spec_.bias) bias_ = Tensor({spec_.geom.c_out});
  } else if (spec_.kind == LayerKind::kBatchRenorm) {
    const std::size_t channels = spec_.in_shape[0];
    weight_ = Tensor::filled({channels}, 1.0f);
    bias_ = Tensor({channels});
    stats_ = RenormStats::identity(channels);
  }
}

void Layer::check_input(const Tensor& act_in) const {
  if (act_in.rank() != 4 || Shape(act_in.dims().begin() + 1, act_in.dims().end()) != spec_.in_shape) {
    throw ShapeError("layer '" + spec_.name + "' expects N x " + to_string(spec_.in_shape) + " input, got " +
                     to_string(act_in.dims()));
  }
}

const LayerTape& Layer::tape() const {
  if (!tape_) throw StateError("layer '" + spec_.name + "' has no recorded tape");
  return *tape_;
}

Tensor Layer::forward(const Tensor& act_in, Mode mode, ExecConfig exec) {
  check_input(act_in);
  const bool training = mode == Mode::kTraining;
  if (training) {
    tape_.emplace();
    tape_->act_in = act_in;
  } else {
    tape_.reset();
  }

  switch (spec_.kind) {
    case LayerKind::kConv:
    case LayerKind::kDepthwise:
    case LayerKind::kPointwise:
    case LayerKind::kFullyConnected:
      return conv_forward(spec_, act_in, weight_, bias_, exec);
    case LayerKind::kRelu:
      return relu_forward(act_in);
    case LayerKind::kAvgPool:
      return avg_pool_forward(act_in);
    case LayerKind::kBatchRenorm:
      return batch_renorm_forward(act_in, weight_, bias_, stats_, spec_.renorm, training,
                                  training ? &tape_->renorm : nullptr);
    case LayerKind::kSoftmaxXent:
      return act_in;
  }
  throw ArgumentError("unhandled layer kind");
}

Tensor Layer::backward_error(const Tensor& err_in, ExecConfig exec) const {
  switch (spec_.kind) {
    case LayerKind::kConv:
    case LayerKind::kDepthwise:
    case LayerKind::kPointwise:
    case LayerKind::kFullyConnected:
      return conv_backward_error(spec_, err_in, weight_, exec);
    case LayerKind::kRelu:
      return relu_backward(err_in, tape().act_in);
    case LayerKind::kAvgPool:
      return avg_pool_backward(err_in, tape().act_in.dims());
    case LayerKind::kBatchRenorm:
      return batch_renorm_backward_error(err_in, weight_, tape().renorm);
    case LayerKind::kSoftmaxXent:
      return err_in;
  }
  throw ArgumentError("unhandled layer kind");
}

ParamGrads Layer::backward_grad(const Tensor& err_in, ExecConfig exec) const {
  if (is_gemm_kind(spec_.kind)) return conv_backward_grad(spec_, tape().act_in, err_in, exec);
  if (spec_.kind == LayerKind::kBatchRenorm) return batch_renorm_backward_grad(err_in, tape().renorm);
  throw ArgumentError("layer '" + spec_.name + "' has no parameters");
}

}  // namespace edgecl::nn
