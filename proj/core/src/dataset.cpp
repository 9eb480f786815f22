#include "edgecl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "edgecl/errors.hpp"

namespace edgecl::harness {

Dataset synth_dataset(std::size_t classes, std::size_t per_class, const Shape& input_shape, float noise,
                      std::uint64_t seed) {
  if (classes < 2) throw ConfigError("a synthetic task needs at least two classes");
  if (per_class == 0) throw ConfigError("a synthetic task needs at least one sample per class");
  if (input_shape.size() != 3 || element_count(input_shape) == 0) {
    throw ConfigError("synthetic images need a C x H x W shape, got " + to_string(input_shape));
  }
  if (!(noise >= 0.0f)) throw ConfigError("noise must be non-negative");

  const std::size_t c = input_shape[0], h = input_shape[1], w = input_shape[2];
  const std::size_t sample = c * h * w;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<float> prototypes(classes * sample);
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double cy = unit(rng) * static_cast<double>(h - 1);
      const double cx = unit(rng) * static_cast<double>(w - 1);
      const double sigma = 0.75 + unit(rng) * 0.25 * static_cast<double>(std::max(h, w));
      const double amp = (unit(rng) < 0.5 ? -1.0 : 1.0) * (1.0 + unit(rng));
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
          prototypes[k * sample + (ch * h + y) * w + x] =
              static_cast<float>(amp * std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma)));
        }
      }
    }
  }

  Dataset data;
  data.classes = classes;
  Shape dims{classes * per_class};
  dims.insert(dims.end(), input_shape.begin(), input_shape.end());
  data.images = Tensor(dims);
  data.labels.reserve(classes * per_class);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  float* out = data.images.data();
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t n = 0; n < per_class; ++n) {
      for (std::size_t i = 0; i < sample; ++i) {
        // Always draw, so noise = 0 consumes the same stream as noise > 0.
        const float z = gauss(rng);
        *out++ = prototypes[k * sample + i] + noise * z;
      }
      data.labels.push_back(static_cast<std::uint32_t>(k));
    }
  }
  return data;
}

Dataset select_classes(const Dataset& data, std::span<const std::uint32_t> classes) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    if (std::find(classes.begin(), classes.end(), data.labels[i]) != classes.end()) keep.push_back(i);
  }
  if (keep.empty()) throw ArgumentError("no samples for the requested classes");
  Shape dims = data.images.dims();
  dims[0] = keep.size();
  Dataset out;
  out.classes = data.classes;
  out.images = Tensor(dims);
  const std::size_t sample = data.images.size() / data.images.dim(0);
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto src = data.images.outer_slice(keep[j]);
    std::copy(src.begin(), src.end(), out.images.data() + j * sample);
    out.labels.push_back(data.labels[keep[j]]);
  }
  return out;
}

}  // namespace edgecl::harness
