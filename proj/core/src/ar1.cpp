#include "edgecl/ar1.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "edgecl/activations.hpp"
#include "edgecl/errors.hpp"

namespace edgecl::ar1 {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0f)) throw ConfigError("learning_rate must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(fisher_decay >= 0.0f && fisher_decay <= 1.0f)) throw ConfigError("fisher_decay must lie in [0, 1]");
  if (!(fisher_clip > 0.0f)) throw ConfigError("fisher_clip must be > 0");
}

FisherState FisherState::zeros(const Shape& dims, float clip) { return {Tensor(dims), clip}; }

FisherState fisher_accumulate(FisherState state, const Tensor& grad, float decay) {
  if (state.f.dims() != grad.dims()) {
    throw ShapeError("fisher state " + to_string(state.f.dims()) + " does not match gradient " +
                     to_string(grad.dims()));
  }
  const float keep = 1.0f - decay;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const float updated = decay * state.f[i] + keep * (grad[i] * grad[i]);
    state.f[i] = std::min(updated, state.f_max_clip);
  }
  return state;
}

Tensor ar1_step(Tensor params, const Tensor& grad, const FisherState& state, float learning_rate) {
  if (params.dims() != grad.dims() || params.dims() != state.f.dims()) {
    throw ShapeError("ar1_step operands disagree: params " + to_string(params.dims()) + ", grad " +
                     to_string(grad.dims()) + ", fisher " + to_string(state.f.dims()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const float scale = std::clamp(1.0f - state.f[i] / state.f_max_clip, 0.0f, 1.0f);
    const float step = learning_rate * scale;
    params[i] -= step * grad[i];
  }
  return params;
}

FisherState& FisherBank::state(std::size_t layer, ParamSlot slot, const Shape& dims, float clip) {
  auto [it, inserted] = states_.try_emplace({layer, slot}, FisherState{});
  if (inserted) it->second = FisherState::zeros(dims, clip);
  if (it->second.f.dims() != dims) throw ShapeError("fisher state for layer " + std::to_string(layer) + " changed shape");
  return it->second;
}

const FisherState* FisherBank::find(std::size_t layer, ParamSlot slot) const {
  auto it = states_.find({layer, slot});
  return it == states_.end() ? nullptr : &it->second;
}

std::size_t FisherBank::element_total() const {
  std::size_t total = 0;
  for (const auto& [key, state] : states_) total += state.f.size();
  return total;
}

double train_batch(nn::Network& net, const Tensor& latents, std::span<const std::uint32_t> labels,
                   const TrainConfig& cfg, FisherBank& fisher, nn::ExecConfig exec) {
  cfg.validate();
  const std::size_t cut = net.lr_cut();
  if (latents.rank() != net.latent_shape().size() + 1 ||
      Shape(latents.dims().begin() + 1, latents.dims().end()) != net.latent_shape()) {
    throw ConfigError("batch of shape " + to_string(latents.dims()) + " does not match the cut activation " +
                      to_string(net.latent_shape()));
  }

  const Tensor logits = net.forward(latents, cut, net.size(), nn::Mode::kTraining, exec);
  nn::LossResult loss = nn::softmax_xent(logits, labels);

  struct Pending {
    std::size_t layer;
    nn::ParamGrads grads;
  };
  std::vector<Pending> pending;
  Tensor err = std::move(loss.err);
  for (std::size_t i = net.size(); i-- > cut;) {
    nn::Layer& layer = net.layer(i);
    if (layer.trainable()) pending.push_back({i, layer.backward_grad(err, exec)});
    if (i > cut) err = layer.backward_error(err, exec);
  }

  for (Pending& p : pending) {
    nn::Layer& layer = net.layer(p.layer);
    FisherState& fw = fisher.state(p.layer, ParamSlot::kWeight, layer.weight().dims(), cfg.fisher_clip);
    fw = fisher_accumulate(std::move(fw), p.grads.weight, cfg.fisher_decay);
    layer.weight() = ar1_step(std::move(layer.weight()), p.grads.weight, fw, cfg.learning_rate);
    if (!p.grads.bias.empty()) {
      FisherState& fb = fisher.state(p.layer, ParamSlot::kBias, layer.bias().dims(), cfg.fisher_clip);
      fb = fisher_accumulate(std::move(fb), p.grads.bias, cfg.fisher_decay);
      layer.bias() = ar1_step(std::move(layer.bias()), p.grads.bias, fb, cfg.learning_rate);
    }
  }
  net.clear_tapes();
  return loss.loss;
}

}  // namespace edgecl::ar1
