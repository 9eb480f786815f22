#pragma once

// Brute-force references for the kernels. Nothing here shares code with the
// library beyond Tensor and the layer descriptions.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "edgecl/layer_spec.hpp"
#include "edgecl/tensor.hpp"

namespace edgecl::testing {

inline Tensor random_tensor(Shape dims, std::mt19937_64& rng, float lo = -1.0f, float hi = 1.0f) {
  Tensor t(std::move(dims));
  std::uniform_real_distribution<float> dist(lo, hi);
  for (float& v : t.values()) v = dist(rng);
  return t;
}

inline std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Float accumulation in ascending k from 0: the order the library promises.
inline Tensor naive_gemm(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      float s = 0.0f;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      out[i * n + j] = s;
    }
  }
  return out;
}

// Enumerates every receptive field position and copies what it sees.
inline Tensor naive_im2col(const Tensor& image, const ConvGeometry& g) {
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const std::size_t oh_n = (h + 2 * g.padding - g.k_h) / g.stride + 1;
  const std::size_t ow_n = (w + 2 * g.padding - g.k_w) / g.stride + 1;
  Tensor cols({c * g.k_h * g.k_w, oh_n * ow_n});
  for (std::size_t oh = 0; oh < oh_n; ++oh) {
    for (std::size_t ow = 0; ow < ow_n; ++ow) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t kh = 0; kh < g.k_h; ++kh) {
          for (std::size_t kw = 0; kw < g.k_w; ++kw) {
            const long y = static_cast<long>(oh * g.stride + kh) - static_cast<long>(g.padding);
            const long x = static_cast<long>(ow * g.stride + kw) - static_cast<long>(g.padding);
            float v = 0.0f;
            if (y >= 0 && x >= 0 && y < static_cast<long>(h) && x < static_cast<long>(w)) {
              v = image[(ch * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)];
            }
            cols[((ch * g.k_h + kh) * g.k_w + kw) * (oh_n * ow_n) + oh * ow_n + ow] = v;
          }
        }
      }
    }
  }
  return cols;
}

inline Tensor naive_flip(const Tensor& w) {
  const std::size_t co = w.dim(0), ci = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  Tensor out({ci, co, kh, kw});
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t i = 0; i < ci; ++i)
      for (std::size_t y = 0; y < kh; ++y)
        for (std::size_t x = 0; x < kw; ++x)
          out[((i * co + o) * kh + (kh - 1 - y)) * kw + (kw - 1 - x)] = w[((o * ci + i) * kh + y) * kw + x];
  return out;
}

// Direct convolution in double, straight from the definition. Handles
// conv, pointwise, depthwise and fully-connected specs.
inline Tensor naive_conv(const nn::LayerSpec& spec, const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t n = x.dim(0);
  const auto& g = spec.geom;
  if (spec.kind == nn::LayerKind::kFullyConnected) {
    const std::size_t in = g.c_in, out = g.c_out;
    Tensor y({n, out, 1, 1});
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t o = 0; o < out; ++o) {
        double acc = b.empty() ? 0.0 : b[o];
        for (std::size_t i = 0; i < in; ++i) acc += static_cast<double>(w[o * in + i]) * x[s * in + i];
        y[s * out + o] = static_cast<float>(acc);
      }
    return y;
  }
  const std::size_t h = spec.in_shape[1], wd = spec.in_shape[2];
  const std::size_t oh_n = spec.out_shape[1], ow_n = spec.out_shape[2];
  const bool dw = spec.kind == nn::LayerKind::kDepthwise;
  Tensor y({n, g.c_out, oh_n, ow_n});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t o = 0; o < g.c_out; ++o)
      for (std::size_t oy = 0; oy < oh_n; ++oy)
        for (std::size_t ox = 0; ox < ow_n; ++ox) {
          double acc = b.empty() ? 0.0 : b[o];
          const std::size_t c_lo = dw ? o : 0, c_hi = dw ? o + 1 : g.c_in;
          for (std::size_t c = c_lo; c < c_hi; ++c)
            for (std::size_t ky = 0; ky < g.k_h; ++ky)
              for (std::size_t kx = 0; kx < g.k_w; ++kx) {
                const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.padding);
                const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.padding);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) continue;
                const std::size_t wi = dw ? (o * g.k_h + ky) * g.k_w + kx
                                          : ((o * g.c_in + c) * g.k_h + ky) * g.k_w + kx;
                acc += static_cast<double>(w[wi]) *
                       x[((s * g.c_in + c) * h + static_cast<std::size_t>(iy)) * wd + static_cast<std::size_t>(ix)];
              }
          y[((s * g.c_out + o) * oh_n + oy) * ow_n + ox] = static_cast<float>(acc);
        }
  return y;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double norm_relative_error(const Tensor& a, const Tensor& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    diff += d * d;
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

// Central differences of a scalar function of `x`, one coordinate at a time.
template <typename Loss>
Tensor numeric_gradient(Tensor x, Loss&& loss, float h = 1e-2f) {
  Tensor g(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float saved = x[i];
    x[i] = saved + h;
    const double up = loss(x);
    x[i] = saved - h;
    const double down = loss(x);
    x[i] = saved;
    g[i] = static_cast<float>((up - down) / (2.0 * static_cast<double>(h)));
  }
  return g;
}

}  // namespace edgecl::testing
