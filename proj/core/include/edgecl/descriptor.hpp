#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "edgecl/layer_spec.hpp"

namespace edgecl {

// Ordered layer list plus optional per-cut accuracy metadata. Cuts name the
// first retrained layer; the latent replay is that layer's input.
struct NetworkDescriptor {
  std::string name;
  Shape input_shape;
  std::vector<nn::LayerSpec> layers;
  // Ingested (not measured) accuracy per cut, in percent.
  std::map<std::string, double> accuracy_by_cut;

  // Shapes chain, names are unique, accuracy keys resolve. ConfigError otherwise.
  void validate() const;

  std::size_t layer_index(std::string_view layer_name) const;
  // Exact layer name, or a block prefix ("conv5_4" -> first "conv5_4/..."
  // layer). ConfigError listing the valid names otherwise.
  std::size_t resolve_cut(std::string_view cut) const;
  // Indices of the GEMM layers, the meaningful cut points.
  std::vector<std::size_t> candidate_cuts() const;
  std::vector<std::string> layer_names() const;
  std::size_t parameter_count() const;
};

// Text format:
//   name = mobilenet_v1_128
//   input = 3x128x128
//   layer conv1 {
//     kind = conv
//     out = 32
//     kernel = 3
//     stride = 2
//     padding = 1
//   }
//   layer conv1/relu { kind = relu }
//   accuracy conv1 = 77.3
// '#' starts a comment. Layer shapes are inferred by chaining from `input`.
NetworkDescriptor parse_descriptor(std::string_view text);
NetworkDescriptor load_descriptor(const std::filesystem::path& path);
std::string format_descriptor(const NetworkDescriptor& descriptor);

// Appends layers with inferred shapes.
class DescriptorBuilder {
 public:
  DescriptorBuilder(std::string name, Shape input_shape);

  DescriptorBuilder& conv(std::string name, std::size_t c_out, std::size_t kernel, std::size_t stride = 1,
                          std::size_t padding = 0, bool bias = false);
  DescriptorBuilder& depthwise(std::string name, std::size_t kernel, std::size_t stride = 1, std::size_t padding = 0,
                               bool bias = false);
  DescriptorBuilder& pointwise(std::string name, std::size_t c_out, bool bias = false);
  DescriptorBuilder& fully_connected(std::string name, std::size_t out_features, bool bias = true);
  DescriptorBuilder& avg_pool(std::string name);
  DescriptorBuilder& relu(std::string name);
  DescriptorBuilder& batch_renorm(std::string name, nn::RenormConfig config = {});
  DescriptorBuilder& softmax_xent(std::string name);
  DescriptorBuilder& accuracy(std::string cut, double percent);
  DescriptorBuilder& add(nn::LayerSpec spec);

  const Shape& current_shape() const noexcept { return shape_; }
  NetworkDescriptor build() const;

 private:
  NetworkDescriptor desc_;
  Shape shape_;
};

}  // namespace edgecl
