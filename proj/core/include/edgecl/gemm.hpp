#pragma once

#include <cstddef>

#include "edgecl/matrix_view.hpp"
#include "edgecl/tensor.hpp"

namespace edgecl {

struct GemmOptions {
  // Output rows are split into contiguous blocks, one per worker. Each
  // output element is owned by exactly one worker.
  std::size_t workers = 1;
  // Add into the existing contents of `out` instead of overwriting.
  bool accumulate = false;
};

// out = a * b (or out += a * b). Every output element is reduced over k in
// ascending order starting from 0 (or from its prior value), so any row/column
// partition and any worker count gives bit-identical results.
void gemm(ConstMatrixView a, ConstMatrixView b, MatrixView out, GemmOptions options = {});

// Rank-2 tensor forms: a is M x K, b is K x N.
Tensor gemm(const Tensor& a, const Tensor& b, std::size_t workers = 1);
Tensor gemm(const Tensor& a, const Tensor& b, const Tensor& accumulate_into, std::size_t workers = 1);

}  // namespace edgecl
