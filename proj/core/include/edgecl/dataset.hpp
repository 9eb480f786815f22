#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edgecl/tensor.hpp"

namespace edgecl::harness {

struct Dataset {
  Tensor images;  // N x C x H x W
  std::vector<std::uint32_t> labels;
  std::size_t classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

// Each class gets a prototype built from one Gaussian bump per channel
// (random centre, width and signed amplitude); samples are the prototype
// plus i.i.d. N(0, noise^2) pixels. Samples are grouped by class in label
// order. Byte-identical for a given seed.
Dataset synth_dataset(std::size_t classes, std::size_t per_class, const Shape& input_shape, float noise,
                      std::uint64_t seed);

// Samples whose label is in `classes`, in their original order.
Dataset select_classes(const Dataset& data, std::span<const std::uint32_t> classes);

}  // namespace edgecl::harness
