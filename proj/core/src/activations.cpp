#include "edgecl/activations.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "edgecl/errors.hpp"

namespace edgecl::nn {

Tensor relu_forward(const Tensor& act_in) {
  Tensor out(act_in.dims());
  for (std::size_t i = 0; i < act_in.size(); ++i) out[i] = act_in[i] > 0.0f ? act_in[i] : 0.0f;
  return out;
}

Tensor relu_backward(const Tensor& err_in, const Tensor& act_in) {
  if (err_in.dims() != act_in.dims()) throw ShapeError("relu error does not match saved input");
  Tensor out(err_in.dims());
  for (std::size_t i = 0; i < err_in.size(); ++i) out[i] = act_in[i] > 0.0f ? err_in[i] : 0.0f;
  return out;
}

Tensor avg_pool_forward(const Tensor& act_in) {
  if (act_in.rank() != 4) throw ShapeError("avg pool expects N x C x H x W");
  const std::size_t planes = act_in.dim(0) * act_in.dim(1);
  const std::size_t area = act_in.dim(2) * act_in.dim(3);
  Tensor out({act_in.dim(0), act_in.dim(1), 1, 1});
  for (std::size_t p = 0; p < planes; ++p) {
    double sum = 0.0;
    for (std::size_t i = 0; i < area; ++i) sum += act_in[p * area + i];
    out[p] = static_cast<float>(sum / static_cast<double>(area));
  }
  return out;
}

Tensor avg_pool_backward(const Tensor& err_in, const Shape& in_dims) {
  if (in_dims.size() != 4 || err_in.dims() != Shape{in_dims[0], in_dims[1], 1, 1}) {
    throw ShapeError("avg pool error " + to_string(err_in.dims()) + " does not match input " + to_string(in_dims));
  }
  const std::size_t area = in_dims[2] * in_dims[3];
  const float scale = 1.0f / static_cast<float>(area);
  Tensor out(in_dims);
  for (std::size_t p = 0; p < err_in.size(); ++p) {
    std::fill_n(out.data() + p * area, area, err_in[p] * scale);
  }
  return out;
}

LossResult softmax_xent(const Tensor& logits, std::span<const std::uint32_t> labels) {
  if (logits.rank() != 2 && !(logits.rank() == 4 && logits.dim(2) == 1 && logits.dim(3) == 1)) {
    throw ShapeError("softmax_xent expects N x K logits, got " + to_string(logits.dims()));
  }
  const std::size_t batch = logits.dim(0);
  const std::size_t classes = logits.dim(1);
  if (labels.size() != batch) throw ArgumentError("softmax_xent needs one label per sample");

  LossResult result{0.0, Tensor(logits.dims())};
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t n = 0; n < batch; ++n) {
    if (labels[n] >= classes) {
      throw ArgumentError("label " + std::to_string(labels[n]) + " out of range for " + std::to_string(classes) +
                          " classes");
    }
    const float* row = logits.data() + n * classes;
    const double peak = *std::max_element(row, row + classes);
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) denom += std::exp(row[k] - peak);
    const double log_denom = std::log(denom);
    result.loss += (log_denom - (row[labels[n]] - peak)) * inv_batch;
    for (std::size_t k = 0; k < classes; ++k) {
      const double prob = std::exp(row[k] - peak - log_denom);
      const double target = k == labels[n] ? 1.0 : 0.0;
      result.err[n * classes + k] = static_cast<float>((prob - target) * inv_batch);
    }
  }
  return result;
}

std::vector<std::uint32_t> argmax_rows(const Tensor& logits) {
  if (logits.rank() < 2) throw ShapeError("argmax_rows expects at least rank 2");
  const std::size_t batch = logits.dim(0);
  const std::size_t classes = logits.size() / batch;
  std::vector<std::uint32_t> out(batch);
  for (std::size_t n = 0; n < batch; ++n) {
    const float* row = logits.data() + n * classes;
    out[n] = static_cast<std::uint32_t>(std::max_element(row, row + classes) - row);
  }
  return out;
}

}  // namespace edgecl::nn
