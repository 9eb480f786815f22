#include "edgecl/im2col.hpp"

#include <algorithm>
#include <string>

#include "edgecl/errors.hpp"

namespace edgecl {

namespace {

std::size_t out_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t padding) {
  const std::size_t padded = in + 2 * padding;
  if (padded < k) {
    throw GeometryError("kernel " + std::to_string(k) + " exceeds padded extent " + std::to_string(padded));
  }
  return (padded - k) / stride + 1;
}

std::size_t channels(const ConvGeometry& geom) { return geom.c_in; }

}  // namespace

void ConvGeometry::validate() const {
  if (c_in == 0 || c_out == 0 || k_h == 0 || k_w == 0) {
    throw GeometryError("channel and kernel extents must be >= 1");
  }
  if (stride == 0) throw GeometryError("stride must be >= 1");
  if (depthwise && c_in != c_out) throw GeometryError("depthwise geometry needs c_out == c_in");
}

std::size_t ConvGeometry::out_h(std::size_t in_h) const { return out_extent(in_h, k_h, stride, padding); }
std::size_t ConvGeometry::out_w(std::size_t in_w) const { return out_extent(in_w, k_w, stride, padding); }

void im2col(std::span<const float> image, std::size_t height, std::size_t width, const ConvGeometry& geom,
            std::span<float> cols) {
  const std::size_t oh_n = geom.out_h(height);
  const std::size_t ow_n = geom.out_w(width);
  const std::size_t c_n = channels(geom);
  if (image.size() != c_n * height * width) throw ShapeError("im2col input size does not match geometry");
  if (cols.size() != c_n * geom.kernel_area() * oh_n * ow_n) throw ShapeError("im2col output size mismatch");

  const auto pad = static_cast<std::ptrdiff_t>(geom.padding);
  const auto stride = static_cast<std::ptrdiff_t>(geom.stride);
  const auto h = static_cast<std::ptrdiff_t>(height);
  const auto w = static_cast<std::ptrdiff_t>(width);
  std::size_t row = 0;
  for (std::size_t c = 0; c < c_n; ++c) {
    const float* plane = image.data() + c * height * width;
    for (std::size_t kh = 0; kh < geom.k_h; ++kh) {
      for (std::size_t kw = 0; kw < geom.k_w; ++kw, ++row) {
        float* dst = cols.data() + row * oh_n * ow_n;
        for (std::size_t oh = 0; oh < oh_n; ++oh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) * stride - pad + static_cast<std::ptrdiff_t>(kh);
          for (std::size_t ow = 0; ow < ow_n; ++ow) {
            const std::ptrdiff_t iw =
                static_cast<std::ptrdiff_t>(ow) * stride - pad + static_cast<std::ptrdiff_t>(kw);
            *dst++ = (ih >= 0 && ih < h && iw >= 0 && iw < w) ? plane[ih * w + iw] : 0.0f;
          }
        }
      }
    }
  }
}

Tensor im2col(const Tensor& act_in, const ConvGeometry& geom) {
  geom.validate();
  if (act_in.rank() != 3 || act_in.dim(0) != geom.c_in) {
    throw ShapeError("im2col expects C_in x H x W input, got " + to_string(act_in.dims()));
  }
  const std::size_t height = act_in.dim(1);
  const std::size_t width = act_in.dim(2);
  Tensor cols({geom.c_in * geom.kernel_area(), geom.out_h(height) * geom.out_w(width)});
  im2col(act_in.values(), height, width, geom, cols.values());
  return cols;
}

void col2im(std::span<const float> cols, std::size_t height, std::size_t width, const ConvGeometry& geom,
            std::span<float> image) {
  const std::size_t oh_n = geom.out_h(height);
  const std::size_t ow_n = geom.out_w(width);
  const std::size_t c_n = channels(geom);
  if (image.size() != c_n * height * width) throw ShapeError("col2im image size does not match geometry");
  if (cols.size() != c_n * geom.kernel_area() * oh_n * ow_n) throw ShapeError("col2im input size mismatch");

  const auto pad = static_cast<std::ptrdiff_t>(geom.padding);
  const auto stride = static_cast<std::ptrdiff_t>(geom.stride);
  const auto h = static_cast<std::ptrdiff_t>(height);
  const auto w = static_cast<std::ptrdiff_t>(width);
  std::size_t row = 0;
  for (std::size_t c = 0; c < c_n; ++c) {
    float* plane = image.data() + c * height * width;
    for (std::size_t kh = 0; kh < geom.k_h; ++kh) {
      for (std::size_t kw = 0; kw < geom.k_w; ++kw, ++row) {
        const float* src = cols.data() + row * oh_n * ow_n;
        for (std::size_t oh = 0; oh < oh_n; ++oh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) * stride - pad + static_cast<std::ptrdiff_t>(kh);
          for (std::size_t ow = 0; ow < ow_n; ++ow, ++src) {
            const std::ptrdiff_t iw =
                static_cast<std::ptrdiff_t>(ow) * stride - pad + static_cast<std::ptrdiff_t>(kw);
            if (ih >= 0 && ih < h && iw >= 0 && iw < w) plane[ih * w + iw] += *src;
          }
        }
      }
    }
  }
}

Tensor col2im(const Tensor& cols, const ConvGeometry& geom, std::size_t height, std::size_t width) {
  geom.validate();
  Tensor image({geom.c_in, height, width});
  col2im(cols.values(), height, width, geom, image.values());
  return image;
}

void transposed_im2col(std::span<const float> err, std::size_t height, std::size_t width,
                       const ConvGeometry& geom, std::span<float> cols) {
  const std::size_t oh_n = geom.out_h(height);
  const std::size_t ow_n = geom.out_w(width);
  const std::size_t c_n = geom.depthwise ? geom.c_in : geom.c_out;
  if (err.size() != c_n * oh_n * ow_n) throw ShapeError("transposed im2col error size mismatch");
  if (cols.size() != c_n * geom.kernel_area() * height * width) {
    throw ShapeError("transposed im2col output size mismatch");
  }

  const auto stride = static_cast<std::ptrdiff_t>(geom.stride);
  // Offset between an input coordinate and its position in the dilated map.
  const auto shift_h = static_cast<std::ptrdiff_t>(geom.padding) - static_cast<std::ptrdiff_t>(geom.k_h) + 1;
  const auto shift_w = static_cast<std::ptrdiff_t>(geom.padding) - static_cast<std::ptrdiff_t>(geom.k_w) + 1;
  const auto oh_max = static_cast<std::ptrdiff_t>(oh_n);
  const auto ow_max = static_cast<std::ptrdiff_t>(ow_n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < c_n; ++c) {
    const float* plane = err.data() + c * oh_n * ow_n;
    for (std::size_t kh = 0; kh < geom.k_h; ++kh) {
      for (std::size_t kw = 0; kw < geom.k_w; ++kw, ++row) {
        float* dst = cols.data() + row * height * width;
        for (std::size_t ih = 0; ih < height; ++ih) {
          const std::ptrdiff_t dh = static_cast<std::ptrdiff_t>(ih) + shift_h + static_cast<std::ptrdiff_t>(kh);
          const bool row_hit = dh >= 0 && dh % stride == 0 && dh / stride < oh_max;
          for (std::size_t iw = 0; iw < width; ++iw) {
            const std::ptrdiff_t dw =
                static_cast<std::ptrdiff_t>(iw) + shift_w + static_cast<std::ptrdiff_t>(kw);
            const bool hit = row_hit && dw >= 0 && dw % stride == 0 && dw / stride < ow_max;
            *dst++ = hit ? plane[(dh / stride) * ow_max + dw / stride] : 0.0f;
          }
        }
      }
    }
  }
}

Tensor flip_coeff(const Tensor& coeff) {
  if (coeff.rank() != 4) throw ShapeError("flip_coeff expects a rank-4 tensor, got " + to_string(coeff.dims()));
  const std::size_t c_out = coeff.dim(0);
  const std::size_t c_in = coeff.dim(1);
  const std::size_t k_h = coeff.dim(2);
  const std::size_t k_w = coeff.dim(3);
  Tensor flipped({c_in, c_out, k_h, k_w});
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t i = 0; i < c_in; ++i) {
      for (std::size_t y = 0; y < k_h; ++y) {
        for (std::size_t x = 0; x < k_w; ++x) {
          flipped[((i * c_out + o) * k_h + (k_h - 1 - y)) * k_w + (k_w - 1 - x)] =
              coeff[((o * c_in + i) * k_h + y) * k_w + x];
        }
      }
    }
  }
  return flipped;
}

}  // namespace edgecl
