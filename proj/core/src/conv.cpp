#include "edgecl/conv.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "edgecl/errors.hpp"
#include "edgecl/gemm.hpp"

namespace edgecl::nn {

namespace {

struct Extents {
  std::size_t batch, height, width, out_h, out_w;
};

// Fully-connected layers run as a 1x1 convolution over a 1x1 image.
Extents check_input(const LayerSpec& spec, const Tensor& act_in) {
  if (!is_gemm_kind(spec.kind)) throw ArgumentError("layer '" + spec.name + "' is not a GEMM layer");
  if (act_in.rank() != 4 || Shape(act_in.dims().begin() + 1, act_in.dims().end()) != spec.in_shape) {
    throw ShapeError("layer '" + spec.name + "' expects N x " + to_string(spec.in_shape) + " input, got " +
                     to_string(act_in.dims()));
  }
  if (spec.kind == LayerKind::kFullyConnected) return {act_in.dim(0), 1, 1, 1, 1};
  return {act_in.dim(0), spec.in_shape[1], spec.in_shape[2], spec.out_shape[1], spec.out_shape[2]};
}

void check_error(const LayerSpec& spec, const Tensor& err_in) {
  if (err_in.rank() != 4 || Shape(err_in.dims().begin() + 1, err_in.dims().end()) != spec.out_shape) {
    throw ShapeError("layer '" + spec.name + "' expects N x " + to_string(spec.out_shape) + " error, got " +
                     to_string(err_in.dims()));
  }
}

void check_weight(const LayerSpec& spec, const Tensor& weight) {
  if (weight.dims() != spec.weight_dims()) {
    throw ShapeError("layer '" + spec.name + "' expects coefficients " + to_string(spec.weight_dims()) +
                     ", got " + to_string(weight.dims()));
  }
}

// Pointwise (and fully-connected) layers read the input directly as the
// im2col matrix.
bool reads_in_place(const LayerSpec& spec) {
  return spec.kind == LayerKind::kPointwise || spec.kind == LayerKind::kFullyConnected;
}

std::size_t tile_size(const ExecConfig& exec, std::size_t c_out) {
  return exec.c_tile == 0 ? c_out : std::min(exec.c_tile, c_out);
}

}  // namespace

Tensor conv_forward(const LayerSpec& spec, const Tensor& act_in, const Tensor& weight, const Tensor& bias,
                    ExecConfig exec) {
  const Extents ext = check_input(spec, act_in);
  check_weight(spec, weight);
  if (spec.bias && bias.size() != spec.geom.c_out) throw ShapeError("layer '" + spec.name + "' bias size mismatch");

  const ConvGeometry& geom = spec.geom;
  const std::size_t pixels = ext.out_h * ext.out_w;
  const std::size_t patch = geom.patch_size();
  const std::size_t c_tile = tile_size(exec, geom.c_out);
  Tensor act_out({ext.batch, spec.out_shape[0], spec.out_shape[1], spec.out_shape[2]});

  std::vector<float> cols(reads_in_place(spec) ? 0 : geom.c_in * geom.kernel_area() * pixels);
  std::vector<float> tile(c_tile * patch);
  for (std::size_t n = 0; n < ext.batch; ++n) {
    std::span<const float> image = act_in.outer_slice(n);
    std::span<const float> lowered = image;
    if (!reads_in_place(spec)) {
      im2col(image, ext.height, ext.width, geom, cols);
      lowered = cols;
    }
    const MatrixView out = matrix(act_out.outer_slice(n), geom.c_out, pixels);

    for (std::size_t c0 = 0; c0 < geom.c_out; c0 += c_tile) {
      const std::size_t count = std::min(c_tile, geom.c_out - c0);
      // Stage the coefficient slice the way a DMA transfer into L1 would.
      std::copy_n(weight.values().begin() + static_cast<std::ptrdiff_t>(c0 * patch), count * patch, tile.begin());
      if (geom.depthwise) {
        for (std::size_t c = 0; c < count; ++c) {
          const ConstMatrixView filter = matrix(std::span<const float>(tile).subspan(c * patch, patch), 1, patch);
          const ConstMatrixView field = matrix(lowered.subspan((c0 + c) * patch * pixels, patch * pixels), patch, pixels);
          gemm(filter, field, out.row_block(c0 + c, 1), {exec.workers, false});
        }
      } else {
        const ConstMatrixView filters = matrix(std::span<const float>(tile).first(count * patch), count, patch);
        gemm(filters, matrix(lowered, patch, pixels), out.row_block(c0, count), {exec.workers, false});
      }
    }
    if (spec.bias) {
      for (std::size_t c = 0; c < geom.c_out; ++c) {
        for (float& v : out.row(c)) v += bias[c];
      }
    }
  }
  return act_out;
}

Tensor conv_backward_error(const LayerSpec& spec, const Tensor& err_in, const Tensor& weight, ExecConfig exec) {
  if (!is_gemm_kind(spec.kind)) throw ArgumentError("layer '" + spec.name + "' is not a GEMM layer");
  check_error(spec, err_in);
  check_weight(spec, weight);

  const ConvGeometry& geom = spec.geom;
  const bool fc = spec.kind == LayerKind::kFullyConnected;
  const std::size_t height = fc ? 1 : spec.in_shape[1];
  const std::size_t width = fc ? 1 : spec.in_shape[2];
  const std::size_t in_pixels = height * width;
  const std::size_t area = geom.kernel_area();
  const std::size_t batch = err_in.dim(0);
  const std::size_t c_tile = tile_size(exec, geom.c_out);

  Tensor err_out({batch, spec.in_shape[0], spec.in_shape[1], spec.in_shape[2]});
  const Tensor flipped = flip_coeff(weight.reshaped(
      {geom.c_out, geom.depthwise ? std::size_t{1} : geom.c_in, geom.k_h, geom.k_w}));
  // Depthwise: row c of `flipped` (1 x C x Kh x Kw) is channel c's reversed
  // kernel; otherwise a Cin x (Cout*Kh*Kw) matrix.
  const std::size_t flipped_cols = (geom.depthwise ? 1 : geom.c_out) * area;
  std::vector<float> cols(reads_in_place(spec) ? 0 : geom.c_out * area * in_pixels);

  for (std::size_t n = 0; n < batch; ++n) {
    std::span<const float> err = err_in.outer_slice(n);
    std::span<const float> lowered = err;
    if (!reads_in_place(spec)) {
      transposed_im2col(err, height, width, geom, cols);
      lowered = cols;
    }
    const MatrixView out = matrix(err_out.outer_slice(n), fc ? geom.c_in : spec.in_shape[0], in_pixels);

    for (std::size_t c0 = 0; c0 < geom.c_out; c0 += c_tile) {
      const std::size_t count = std::min(c_tile, geom.c_out - c0);
      if (geom.depthwise) {
        for (std::size_t c = c0; c < c0 + count; ++c) {
          const ConstMatrixView filter = matrix(flipped.values().subspan(c * area, area), 1, area);
          const ConstMatrixView field = matrix(lowered.subspan(c * area * in_pixels, area * in_pixels), area, in_pixels);
          gemm(filter, field, out.row_block(c, 1), {exec.workers, false});
        }
      } else {
        // Tiles split the reduction axis; later tiles accumulate in order.
        const ConstMatrixView filters{flipped.values().subspan(c0 * area), geom.c_in, count * area, flipped_cols, 1};
        const ConstMatrixView field = matrix(lowered.subspan(c0 * area * in_pixels, count * area * in_pixels),
                                             count * area, in_pixels);
        gemm(filters, field, out, {exec.workers, c0 != 0});
      }
    }
  }
  return err_out;
}

ParamGrads conv_backward_grad(const LayerSpec& spec, const Tensor& act_in, const Tensor& err_in, ExecConfig exec) {
  const Extents ext = check_input(spec, act_in);
  check_error(spec, err_in);
  if (err_in.dim(0) != ext.batch) throw ShapeError("layer '" + spec.name + "': activation/error batch mismatch");

  const ConvGeometry& geom = spec.geom;
  const std::size_t pixels = ext.out_h * ext.out_w;
  const std::size_t patch = geom.patch_size();
  const std::size_t c_tile = tile_size(exec, geom.c_out);

  ParamGrads grads{Tensor(spec.weight_dims()), spec.bias ? Tensor({geom.c_out}) : Tensor()};
  const MatrixView grad = matrix(grads.weight.values(), geom.c_out, patch);
  std::vector<std::vector<float>> lowered_batch;
  if (!reads_in_place(spec)) {
    lowered_batch.resize(ext.batch);
    for (std::size_t n = 0; n < ext.batch; ++n) {
      lowered_batch[n].resize(geom.c_in * geom.kernel_area() * pixels);
      im2col(act_in.outer_slice(n), ext.height, ext.width, geom, lowered_batch[n]);
    }
  }

  for (std::size_t c0 = 0; c0 < geom.c_out; c0 += c_tile) {
    const std::size_t count = std::min(c_tile, geom.c_out - c0);
    for (std::size_t n = 0; n < ext.batch; ++n) {
      std::span<const float> lowered =
          reads_in_place(spec) ? act_in.outer_slice(n) : std::span<const float>(lowered_batch[n]);
      std::span<const float> err = err_in.outer_slice(n);
      if (geom.depthwise) {
        for (std::size_t c = c0; c < c0 + count; ++c) {
          const ConstMatrixView e = matrix(err.subspan(c * pixels, pixels), 1, pixels);
          const ConstMatrixView field = matrix(lowered.subspan(c * patch * pixels, patch * pixels), patch, pixels);
          gemm(e, field.transposed(), grad.row_block(c, 1), {exec.workers, true});
        }
      } else {
        const ConstMatrixView e = matrix(err.subspan(c0 * pixels, count * pixels), count, pixels);
        gemm(e, matrix(lowered, patch, pixels).transposed(), grad.row_block(c0, count), {exec.workers, true});
      }
    }
  }

  if (spec.bias) {
    for (std::size_t n = 0; n < ext.batch; ++n) {
      std::span<const float> err = err_in.outer_slice(n);
      for (std::size_t c = 0; c < geom.c_out; ++c) {
        float acc = grads.bias[c];
        for (std::size_t p = 0; p < pixels; ++p) acc += err[c * pixels + p];
        grads.bias[c] = acc;
      }
    }
  }
  return grads;
}

}  // namespace edgecl::nn
