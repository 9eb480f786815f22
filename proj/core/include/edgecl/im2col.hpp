#pragma once

#include <cstddef>
#include <span>

#include "edgecl/tensor.hpp"

namespace edgecl {

struct ConvGeometry {
  std::size_t c_in = 1;
  std::size_t c_out = 1;
  std::size_t k_h = 1;
  std::size_t k_w = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool depthwise = false;

  void validate() const;

  // floor((in + 2*padding - k) / stride) + 1; GeometryError when the padded
  // input is smaller than the kernel.
  std::size_t out_h(std::size_t in_h) const;
  std::size_t out_w(std::size_t in_w) const;

  // Rows of the im2col matrix per output filter: c_in*k_h*k_w, or k_h*k_w
  // for depthwise filters.
  std::size_t patch_size() const noexcept { return (depthwise ? 1 : c_in) * k_h * k_w; }
  std::size_t kernel_area() const noexcept { return k_h * k_w; }

  friend bool operator==(const ConvGeometry&, const ConvGeometry&) = default;
};

// Lowers one C x H x W image to a (C*k_h*k_w) x (H_out*W_out) matrix. Row
// (c, kh, kw), column (oh, ow) holds input[c][oh*s - p + kh][ow*s - p + kw],
// or 0 outside the image.
void im2col(std::span<const float> image, std::size_t height, std::size_t width, const ConvGeometry& geom,
            std::span<float> cols);
Tensor im2col(const Tensor& act_in, const ConvGeometry& geom);

// Adjoint of im2col: scatters-adds columns back onto a C x H x W image.
void col2im(std::span<const float> cols, std::size_t height, std::size_t width, const ConvGeometry& geom,
            std::span<float> image);
Tensor col2im(const Tensor& cols, const ConvGeometry& geom, std::size_t height, std::size_t width);

// im2col of the stride-dilated, (k-1-p)-padded error map: the operand that
// turns error back-propagation into a stride-1 convolution with the flipped
// coefficients. Input is Cout x H_out x W_out; output is
// (Cout*k_h*k_w) x (height*width) where height/width are the forward input
// extents. For depthwise geometry the channel axis is c_in.
void transposed_im2col(std::span<const float> err, std::size_t height, std::size_t width,
                       const ConvGeometry& geom, std::span<float> cols);

// Cout x Cin x Kh x Kw -> Cin x Cout x Kh x Kw with both spatial axes reversed.
Tensor flip_coeff(const Tensor& coeff);

}  // namespace edgecl
