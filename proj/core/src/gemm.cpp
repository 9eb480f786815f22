#include "edgecl/gemm.hpp"

#include <algorithm>
#include <thread>
#include <vector>

#include "edgecl/errors.hpp"

namespace edgecl {

ConstMatrixView as_matrix(const Tensor& t, std::size_t rows) {
  if (rows == 0 || t.size() % rows != 0) {
    throw ShapeError("cannot view " + to_string(t.dims()) + " as a matrix with " + std::to_string(rows) +
                     " rows");
  }
  return matrix(t.values(), rows, t.size() / rows);
}

MatrixView as_matrix(Tensor& t, std::size_t rows) {
  if (rows == 0 || t.size() % rows != 0) {
    throw ShapeError("cannot view " + to_string(t.dims()) + " as a matrix with " + std::to_string(rows) +
                     " rows");
  }
  return matrix(t.values(), rows, t.size() / rows);
}

namespace {

// b rows contiguous: stream a row of b per k (axpy form).
void gemm_rows_axpy(ConstMatrixView a, ConstMatrixView b, MatrixView out, std::size_t first,
                    std::size_t last, bool accumulate) {
  const std::size_t n_cols = out.cols;
  for (std::size_t m = first; m < last; ++m) {
    float* c = out.row(m).data();
    if (!accumulate) std::fill(c, c + n_cols, 0.0f);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const float av = a(m, k);
      const float* brow = b.data.data() + k * b.row_stride;
      for (std::size_t n = 0; n < n_cols; ++n) c[n] += av * brow[n];
    }
  }
}

// b columns contiguous (e.g. a transposed view): dot-product form.
void gemm_rows_dot(ConstMatrixView a, ConstMatrixView b, MatrixView out, std::size_t first,
                   std::size_t last, bool accumulate) {
  for (std::size_t m = first; m < last; ++m) {
    float* c = out.row(m).data();
    for (std::size_t n = 0; n < out.cols; ++n) {
      float acc = accumulate ? c[n] : 0.0f;
      for (std::size_t k = 0; k < a.cols; ++k) acc += a(m, k) * b(k, n);
      c[n] = acc;
    }
  }
}

}  // namespace

void gemm(ConstMatrixView a, ConstMatrixView b, MatrixView out, GemmOptions options) {
  if (a.cols != b.rows) {
    throw ShapeError("gemm inner extents differ: " + std::to_string(a.cols) + " vs " + std::to_string(b.rows));
  }
  if (out.rows != a.rows || out.cols != b.cols) {
    throw ShapeError("gemm output must be " + std::to_string(a.rows) + "x" + std::to_string(b.cols));
  }
  const bool axpy = b.col_stride == 1;
  auto run = [&](std::size_t first, std::size_t last) {
    if (axpy) {
      gemm_rows_axpy(a, b, out, first, last, options.accumulate);
    } else {
      gemm_rows_dot(a, b, out, first, last, options.accumulate);
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(out.rows, 1));
  if (workers == 1) {
    run(0, out.rows);
    return;
  }
  const std::size_t chunk = (out.rows + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t first = std::min(out.rows, w * chunk);
    const std::size_t last = std::min(out.rows, first + chunk);
    if (first < last) pool.emplace_back(run, first, last);
  }
  run(0, std::min(out.rows, chunk));
}

Tensor gemm(const Tensor& a, const Tensor& b, std::size_t workers) {
  if (a.rank() != 2 || b.rank() != 2) throw ShapeError("gemm expects rank-2 operands");
  Tensor out({a.dim(0), b.dim(1)});
  gemm(as_matrix(a, a.dim(0)), as_matrix(b, b.dim(0)), as_matrix(out, out.dim(0)), {workers, false});
  return out;
}

Tensor gemm(const Tensor& a, const Tensor& b, const Tensor& accumulate_into, std::size_t workers) {
  if (a.rank() != 2 || b.rank() != 2) throw ShapeError("gemm expects rank-2 operands");
  if (accumulate_into.dims() != Shape{a.dim(0), b.dim(1)}) {
    throw ShapeError("accumulator must be " + to_string({a.dim(0), b.dim(1)}) + ", got " +
                     to_string(accumulate_into.dims()));
  }
  Tensor out = accumulate_into;
  gemm(as_matrix(a, a.dim(0)), as_matrix(b, b.dim(0)), as_matrix(out, out.dim(0)), {workers, true});
  return out;
}

}  // namespace edgecl
