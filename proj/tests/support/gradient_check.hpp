#pragma once

#include <algorithm>
#include <random>
#include <utility>

#include "edgecl/layer.hpp"
#include "oracles.hpp"

namespace edgecl::testing {

// Norm-relative errors of the analytic gradients against central
// differences. Negative when the layer has no such tensor.
struct GradientErrors {
  double input = -1.0;
  double weight = -1.0;
  double bias = -1.0;

  double worst() const { return std::max({input, weight, bias}); }
};

inline nn::Layer with_random_params(nn::LayerSpec spec, std::mt19937_64& rng) {
  nn::Layer layer(std::move(spec));
  if (!layer.weight().empty()) layer.weight() = random_tensor(layer.weight().dims(), rng);
  if (!layer.bias().empty()) layer.bias() = random_tensor(layer.bias().dims(), rng);
  return layer;
}

// Keeps |x| >= margin so a central difference never straddles a ReLU kink.
inline Tensor away_from_zero(Tensor x, float margin) {
  for (float& v : x.values()) v = v < 0 ? v - margin : v + margin;
  return x;
}

// Scalar loss dot(forward(x), r) on a fresh copy, so running statistics
// never leak between evaluations.
inline double probe(nn::Layer layer, const Tensor& x, const Tensor& r) {
  return dot(layer.forward(x, nn::Mode::kTraining), r);
}

inline GradientErrors gradient_errors(const nn::Layer& layer, const Tensor& x, std::mt19937_64& rng,
                                      float h = 1e-2f) {
  nn::Layer trained = layer;
  const Tensor y = trained.forward(x, nn::Mode::kTraining);
  const Tensor r = random_tensor(y.dims(), rng);

  GradientErrors out;
  const Tensor numeric_err = numeric_gradient(x, [&](const Tensor& xi) { return probe(layer, xi, r); }, h);
  out.input = norm_relative_error(trained.backward_error(r), numeric_err);
  if (!layer.trainable()) return out;

  const nn::ParamGrads grads = trained.backward_grad(r);
  const Tensor numeric_w = numeric_gradient(
      layer.weight(),
      [&](const Tensor& w) {
        nn::Layer l = layer;
        l.weight() = w;
        return probe(std::move(l), x, r);
      },
      h);
  out.weight = norm_relative_error(grads.weight, numeric_w);
  if (!layer.bias().empty()) {
    const Tensor numeric_b = numeric_gradient(
        layer.bias(),
        [&](const Tensor& b) {
          nn::Layer l = layer;
          l.bias() = b;
          return probe(std::move(l), x, r);
        },
        h);
    out.bias = norm_relative_error(grads.bias, numeric_b);
  }
  return out;
}

}  // namespace edgecl::testing
