#include "edgecl/descriptor.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "edgecl/errors.hpp"

namespace edgecl {

using nn::LayerKind;
using nn::LayerSpec;

void NetworkDescriptor::validate() const {
  if (layers.empty()) throw ConfigError("network '" + name + "' has no layers");
  Shape shape = input_shape;
  std::set<std::string> seen;
  for (const LayerSpec& spec : layers) {
    if (!seen.insert(spec.name).second) throw ConfigError("duplicate layer name '" + spec.name + "'");
    if (spec.in_shape != shape) {
      throw ConfigError("layer '" + spec.name + "' expects " + to_string(spec.in_shape) + " but receives " +
                        to_string(shape));
    }
    spec.validate();
    shape = spec.out_shape;
  }
  for (const auto& [cut, accuracy] : accuracy_by_cut) {
    resolve_cut(cut);
    if (accuracy < 0.0 || accuracy > 100.0) throw ConfigError("accuracy for '" + cut + "' must be a percentage");
  }
}

std::size_t NetworkDescriptor::layer_index(std::string_view layer_name) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == layer_name) return i;
  }
  throw ConfigError("unknown layer '" + std::string(layer_name) + "'");
}

std::size_t NetworkDescriptor::resolve_cut(std::string_view cut) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == cut) return i;
  }
  const std::string prefix = std::string(cut) + "/";
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name.starts_with(prefix)) return i;
  }
  std::string valid;
  for (std::size_t i : candidate_cuts()) valid += (valid.empty() ? "" : ", ") + layers[i].name;
  throw ConfigError("unknown cut '" + std::string(cut) + "'; valid cuts: " + valid);
}

std::vector<std::size_t> NetworkDescriptor::candidate_cuts() const {
  std::vector<std::size_t> cuts;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (nn::is_gemm_kind(layers[i].kind)) cuts.push_back(i);
  }
  return cuts;
}

std::vector<std::string> NetworkDescriptor::layer_names() const {
  std::vector<std::string> names;
  names.reserve(layers.size());
  for (const auto& spec : layers) names.push_back(spec.name);
  return names;
}

std::size_t NetworkDescriptor::parameter_count() const {
  std::size_t total = 0;
  for (const auto& spec : layers) total += spec.param_count();
  return total;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("descriptor line " + std::to_string(line) + ": " + what);
}

std::size_t parse_size(std::string_view v, std::size_t line) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(line, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

double parse_double(std::string_view v, std::size_t line) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(line, "expected a number, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view v, std::size_t line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(line, "expected true/false, got '" + std::string(v) + "'");
}

Shape parse_shape(std::string_view v, std::size_t line) {
  Shape dims;
  while (!v.empty()) {
    const auto x = v.find('x');
    dims.push_back(parse_size(trim(v.substr(0, x)), line));
    if (x == std::string_view::npos) break;
    v.remove_prefix(x + 1);
  }
  if (dims.empty()) fail(line, "empty shape");
  return dims;
}

struct PendingLayer {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, std::string> keys;
};

void append_layer(DescriptorBuilder& builder, const PendingLayer& p) {
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = p.keys.find(key);
    return it == p.keys.end() ? nullptr : &it->second;
  };
  auto size_or = [&](const std::string& key, std::size_t fallback) {
    const std::string* v = get(key);
    return v ? parse_size(*v, p.line) : fallback;
  };
  auto require_size = [&](const std::string& key) {
    const std::string* v = get(key);
    if (!v) fail(p.line, "layer '" + p.name + "' needs '" + key + "'");
    return parse_size(*v, p.line);
  };
  const std::string* kind_text = get("kind");
  if (!kind_text) fail(p.line, "layer '" + p.name + "' has no kind");
  const LayerKind kind = nn::parse_layer_kind(*kind_text);
  const std::string* bias_text = get("bias");

  switch (kind) {
    case LayerKind::kConv:
      builder.conv(p.name, require_size("out"), require_size("kernel"), size_or("stride", 1), size_or("padding", 0),
                   bias_text && parse_bool(*bias_text, p.line));
      break;
    case LayerKind::kDepthwise:
      builder.depthwise(p.name, require_size("kernel"), size_or("stride", 1), size_or("padding", 0),
                        bias_text && parse_bool(*bias_text, p.line));
      break;
    case LayerKind::kPointwise:
      builder.pointwise(p.name, require_size("out"), bias_text && parse_bool(*bias_text, p.line));
      break;
    case LayerKind::kFullyConnected:
      builder.fully_connected(p.name, require_size("out"), !bias_text || parse_bool(*bias_text, p.line));
      break;
    case LayerKind::kAvgPool:
      builder.avg_pool(p.name);
      break;
    case LayerKind::kRelu:
      builder.relu(p.name);
      break;
    case LayerKind::kBatchRenorm: {
      nn::RenormConfig cfg;
      if (const auto* v = get("r_max")) cfg.r_max = static_cast<float>(parse_double(*v, p.line));
      if (const auto* v = get("d_max")) cfg.d_max = static_cast<float>(parse_double(*v, p.line));
      if (const auto* v = get("epsilon")) cfg.epsilon = static_cast<float>(parse_double(*v, p.line));
      if (const auto* v = get("momentum")) cfg.momentum = static_cast<float>(parse_double(*v, p.line));
      builder.batch_renorm(p.name, cfg);
      break;
    }
    case LayerKind::kSoftmaxXent:
      builder.softmax_xent(p.name);
      break;
  }
}

}  // namespace

NetworkDescriptor parse_descriptor(std::string_view text) {
  // Braces become their own lines so one-line blocks parse like multi-line ones.
  std::string normalized;
  std::vector<std::size_t> line_of;  // original line number per normalized line
  {
    std::size_t line = 1;
    std::string current;
    auto flush = [&] {
      normalized += current + "\n";
      line_of.push_back(line);
      current.clear();
    };
    bool comment = false;
    for (char ch : text) {
      if (ch == '\n') {
        flush();
        ++line;
        comment = false;
        continue;
      }
      if (comment) continue;
      if (ch == '#') {
        comment = true;
      } else if (ch == '{' || ch == '}') {
        flush();
        current = ch;
        flush();
      } else if (ch == ';') {
        flush();
      } else {
        current += ch;
      }
    }
    flush();
  }

  std::string name;
  Shape input;
  std::vector<PendingLayer> layers;
  std::vector<std::pair<std::string, double>> accuracies;
  std::optional<PendingLayer> open;
  bool expect_brace = false;

  std::istringstream stream(normalized);
  std::string raw;
  for (std::size_t idx = 0; std::getline(stream, raw); ++idx) {
    const std::size_t line = line_of.at(idx);
    const std::string_view s = trim(raw);
    if (s.empty()) continue;
    if (expect_brace) {
      if (s != "{") fail(line, "expected '{' after layer name");
      expect_brace = false;
      continue;
    }
    if (s == "}") {
      if (!open) fail(line, "unmatched '}'");
      layers.push_back(std::move(*open));
      open.reset();
      continue;
    }
    if (s.starts_with("layer ") || s.starts_with("layer\t")) {
      if (open) fail(line, "nested layer block");
      open.emplace();
      open->name = std::string(trim(s.substr(6)));
      open->line = line;
      if (open->name.empty()) fail(line, "layer without a name");
      expect_brace = true;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) fail(line, "expected 'key = value'");
    const std::string_view key = trim(s.substr(0, eq));
    const std::string_view value = trim(s.substr(eq + 1));
    if (open) {
      open->keys[std::string(key)] = std::string(value);
    } else if (key == "name") {
      name = std::string(value);
    } else if (key == "input") {
      input = parse_shape(value, line);
    } else if (key.starts_with("accuracy ")) {
      accuracies.emplace_back(std::string(trim(key.substr(9))), parse_double(value, line));
    } else {
      fail(line, "unknown key '" + std::string(key) + "'");
    }
  }
  if (open || expect_brace) throw FormatError("descriptor ends inside layer block");
  if (input.size() != 3) throw FormatError("descriptor needs 'input = CxHxW'");

  DescriptorBuilder builder(name, input);
  for (const auto& p : layers) append_layer(builder, p);
  for (const auto& [cut, acc] : accuracies) builder.accuracy(cut, acc);
  NetworkDescriptor desc = builder.build();
  desc.validate();
  return desc;
}

NetworkDescriptor load_descriptor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network descriptor '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_descriptor(text.str());
}

std::string format_descriptor(const NetworkDescriptor& d) {
  std::string out = fmt::format("name = {}\ninput = {}x{}x{}\n\n", d.name, d.input_shape.at(0), d.input_shape.at(1),
                                d.input_shape.at(2));
  for (const auto& s : d.layers) {
    out += fmt::format("layer {} {{\n  kind = {}\n", s.name, nn::to_string(s.kind));
    switch (s.kind) {
      case LayerKind::kConv:
        out += fmt::format("  out = {}\n  kernel = {}\n  stride = {}\n  padding = {}\n  bias = {}\n", s.geom.c_out,
                           s.geom.k_h, s.geom.stride, s.geom.padding, s.bias);
        break;
      case LayerKind::kDepthwise:
        out += fmt::format("  kernel = {}\n  stride = {}\n  padding = {}\n  bias = {}\n", s.geom.k_h, s.geom.stride,
                           s.geom.padding, s.bias);
        break;
      case LayerKind::kPointwise:
      case LayerKind::kFullyConnected:
        out += fmt::format("  out = {}\n  bias = {}\n", s.geom.c_out, s.bias);
        break;
      case LayerKind::kBatchRenorm:
        out += fmt::format("  r_max = {}\n  d_max = {}\n  epsilon = {}\n  momentum = {}\n", s.renorm.r_max,
                           s.renorm.d_max, s.renorm.epsilon, s.renorm.momentum);
        break;
      default:
        break;
    }
    out += "}\n";
  }
  for (const auto& [cut, acc] : d.accuracy_by_cut) out += fmt::format("accuracy {} = {}\n", cut, acc);
  return out;
}

DescriptorBuilder::DescriptorBuilder(std::string name, Shape input_shape) : shape_(input_shape) {
  desc_.name = std::move(name);
  desc_.input_shape = std::move(input_shape);
}

DescriptorBuilder& DescriptorBuilder::add(LayerSpec spec) {
  spec.validate();
  if (spec.in_shape != shape_) {
    throw ConfigError("layer '" + spec.name + "' input " + to_string(spec.in_shape) + " does not chain from " +
                      to_string(shape_));
  }
  shape_ = spec.out_shape;
  desc_.layers.push_back(std::move(spec));
  return *this;
}

DescriptorBuilder& DescriptorBuilder::conv(std::string name, std::size_t c_out, std::size_t kernel,
                                           std::size_t stride, std::size_t padding, bool bias) {
  return add(nn::make_conv(std::move(name), shape_, c_out, kernel, stride, padding, bias));
}
DescriptorBuilder& DescriptorBuilder::depthwise(std::string name, std::size_t kernel, std::size_t stride,
                                                std::size_t padding, bool bias) {
  return add(nn::make_depthwise(std::move(name), shape_, kernel, stride, padding, bias));
}
DescriptorBuilder& DescriptorBuilder::pointwise(std::string name, std::size_t c_out, bool bias) {
  return add(nn::make_pointwise(std::move(name), shape_, c_out, bias));
}
DescriptorBuilder& DescriptorBuilder::fully_connected(std::string name, std::size_t out_features, bool bias) {
  return add(nn::make_fully_connected(std::move(name), shape_, out_features, bias));
}
DescriptorBuilder& DescriptorBuilder::avg_pool(std::string name) {
  return add(nn::make_avg_pool(std::move(name), shape_));
}
DescriptorBuilder& DescriptorBuilder::relu(std::string name) { return add(nn::make_relu(std::move(name), shape_)); }
DescriptorBuilder& DescriptorBuilder::batch_renorm(std::string name, nn::RenormConfig config) {
  return add(nn::make_batch_renorm(std::move(name), shape_, config));
}
DescriptorBuilder& DescriptorBuilder::softmax_xent(std::string name) {
  return add(nn::make_softmax_xent(std::move(name), shape_));
}
DescriptorBuilder& DescriptorBuilder::accuracy(std::string cut, double percent) {
  desc_.accuracy_by_cut[std::move(cut)] = percent;
  return *this;
}

NetworkDescriptor DescriptorBuilder::build() const {
  desc_.validate();
  return desc_;
}

}  // namespace edgecl
