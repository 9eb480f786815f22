#pragma once

#include <cstddef>
#include <span>

#include "edgecl/tensor.hpp"

namespace edgecl {

// Read-only strided view of a rows x cols matrix. Element (r, c) lives at
// data[r * row_stride + c * col_stride]; a transposed view swaps the strides.
struct ConstMatrixView {
  std::span<const float> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t row_stride = 0;
  std::size_t col_stride = 1;

  float operator()(std::size_t r, std::size_t c) const noexcept {
    return data[r * row_stride + c * col_stride];
  }

  ConstMatrixView transposed() const noexcept { return {data, cols, rows, col_stride, row_stride}; }

  ConstMatrixView row_block(std::size_t first, std::size_t count) const noexcept {
    return {data.subspan(first * row_stride), count, cols, row_stride, col_stride};
  }
};

// Writable view with unit column stride.
struct MatrixView {
  std::span<float> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t row_stride = 0;

  float& operator()(std::size_t r, std::size_t c) const noexcept { return data[r * row_stride + c]; }
  std::span<float> row(std::size_t r) const noexcept { return data.subspan(r * row_stride, cols); }

  MatrixView row_block(std::size_t first, std::size_t count) const noexcept {
    return {data.subspan(first * row_stride), count, cols, row_stride};
  }
};

inline ConstMatrixView matrix(std::span<const float> data, std::size_t rows, std::size_t cols) {
  return {data, rows, cols, cols, 1};
}

inline MatrixView matrix(std::span<float> data, std::size_t rows, std::size_t cols) {
  return {data, rows, cols, cols};
}

// Views a tensor as rows x (size / rows); throws ShapeError if it doesn't divide.
ConstMatrixView as_matrix(const Tensor& t, std::size_t rows);
MatrixView as_matrix(Tensor& t, std::size_t rows);

}  // namespace edgecl
