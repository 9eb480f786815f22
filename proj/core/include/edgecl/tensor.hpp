#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace edgecl {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& dims);
std::string to_string(const Shape& dims);

// Dense FP32 tensor, row-major with the outermost axis first. For
// activations the layout is N x C x H x W; for coefficients
// Cout x Cin x Kh x Kw. A default-constructed tensor is empty and stands
// for "absent".
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape dims);
  Tensor(Shape dims, std::vector<float> values);

  static Tensor filled(Shape dims, float value);

  const Shape& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t dim(std::size_t axis) const;

  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }
  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }

  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  // Same buffer, new extents; element counts must agree.
  Tensor reshaped(Shape dims) const&;
  Tensor reshaped(Shape dims) &&;

  // Contiguous slab for index `i` of the outermost axis.
  std::span<float> outer_slice(std::size_t i);
  std::span<const float> outer_slice(std::size_t i) const;

  void fill(float value);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape dims_;
  std::vector<float> data_;
};

// Bit-level equality (distinguishes -0.0 from 0.0, treats equal NaN payloads
// as equal). Used wherever determinism is asserted.
bool bitwise_equal(const Tensor& a, const Tensor& b);
bool bitwise_equal(std::span<const float> a, std::span<const float> b);

}  // namespace edgecl
