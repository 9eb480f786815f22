#include "edgecl/tensor.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <numeric>
#include <utility>

#include "edgecl/errors.hpp"

namespace edgecl {

namespace {

void check_extents(const Shape& dims) {
  if (dims.empty()) throw ShapeError("tensor needs at least one axis");
  for (auto extent : dims) {
    if (extent == 0) throw ShapeError("tensor extent must be >= 1, got " + to_string(dims));
  }
}

}  // namespace

std::size_t element_count(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape dims) : dims_(std::move(dims)) {
  check_extents(dims_);
  data_.assign(element_count(dims_), 0.0f);
}

Tensor::Tensor(Shape dims, std::vector<float> values)
    : dims_(std::move(dims)), data_(std::move(values)) {
  check_extents(dims_);
  if (element_count(dims_) != data_.size()) {
    throw ShapeError("tensor " + to_string(dims_) + " needs " + std::to_string(element_count(dims_)) +
                     " values, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::filled(Shape dims, float value) {
  Tensor t(std::move(dims));
  t.fill(value);
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= dims_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + to_string(dims_));
  }
  return dims_[axis];
}

Tensor Tensor::reshaped(Shape dims) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(dims));
}

Tensor Tensor::reshaped(Shape dims) && {
  check_extents(dims);
  if (element_count(dims) != data_.size()) {
    throw ShapeError("cannot reshape " + to_string(dims_) + " to " + to_string(dims));
  }
  dims_ = std::move(dims);
  return std::move(*this);
}

std::span<float> Tensor::outer_slice(std::size_t i) {
  const std::size_t stride = data_.size() / dim(0);
  if (i >= dims_[0]) throw ShapeError("outer index out of range");
  return std::span<float>(data_).subspan(i * stride, stride);
}

std::span<const float> Tensor::outer_slice(std::size_t i) const {
  const std::size_t stride = data_.size() / dim(0);
  if (i >= dims_[0]) throw ShapeError("outer index out of range");
  return std::span<const float>(data_).subspan(i * stride, stride);
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

bool bitwise_equal(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size_bytes()) == 0;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return a.dims() == b.dims() && bitwise_equal(a.values(), b.values());
}

}  // namespace edgecl
