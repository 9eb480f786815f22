#include "edgecl/perf_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "edgecl/csv.hpp"
#include "edgecl/errors.hpp"

namespace edgecl::perf {

namespace {

constexpr std::string_view kRatePrefix = "mac_per_cycle.";

bool valid_pass_key(std::string_view key) {
  return key == "fwd" || key == "bwd" || key == "bwd_err" || key == "bwd_grad";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void require_gemm(const nn::LayerSpec& layer) {
  if (!nn::is_gemm_kind(layer.kind)) {
    throw ArgumentError("layer '" + layer.name + "' (" + std::string(nn::to_string(layer.kind)) +
                        ") has no GEMM cost");
  }
}

std::uint64_t per_channel_macs(const nn::LayerSpec& layer) {
  return static_cast<std::uint64_t>(layer.geom.patch_size()) * layer.out_shape.at(1) * layer.out_shape.at(2);
}

}  // namespace

std::string_view to_string(Pass pass) {
  switch (pass) {
    case Pass::kForward:
      return "fwd";
    case Pass::kBackwardError:
      return "bwd_err";
    case Pass::kBackwardGrad:
      return "bwd_grad";
  }
  return "?";
}

double HwProfile::rate(nn::LayerKind kind, Pass pass) const {
  if (auto it = mac_per_cycle.find({kind, std::string(to_string(pass))}); it != mac_per_cycle.end()) {
    return it->second;
  }
  if (pass != Pass::kForward) {
    if (auto it = mac_per_cycle.find({kind, std::string(kSharedBackward)}); it != mac_per_cycle.end()) {
      return it->second;
    }
  }
  return default_mac_per_cycle;
}

void HwProfile::validate() const {
  auto fail = [&](const std::string& what) { throw ConfigError("hardware profile '" + name + "': " + what); };
  if (cores < 1) fail("cores must be at least 1");
  if (!(freq_hz > 0.0)) fail("freq_hz must be positive");
  if (!(parallel_speedup >= 1.0) || parallel_speedup > static_cast<double>(cores)) {
    fail("parallel_speedup must lie in [1, cores]");
  }
  if (!(default_mac_per_cycle > 0.0)) fail("default_mac_per_cycle must be positive");
  for (const auto& [key, value] : mac_per_cycle) {
    if (!(value > 0.0)) {
      fail("mac_per_cycle." + std::string(nn::to_string(key.first)) + "." + key.second + " must be positive");
    }
  }
  if (!(dma_overhead_frac >= 0.0)) fail("dma_overhead_frac must be non-negative");
  if (power_active_w < 0.0 || efficiency_mmac_per_s_per_mw < 0.0) fail("power figures must be non-negative");
}

HwProfile parse_hw_profile(std::string_view text) {
  HwProfile hw;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(fmt::format("hardware profile line {}: expected key = value", line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string where = fmt::format("line {} ({})", line_no, key);

    if (key == "name") {
      hw.name = std::string(value);
    } else if (key == "cores") {
      hw.cores = csv::parse_size(value, where);
    } else if (key == "freq_hz") {
      hw.freq_hz = csv::parse_double(value, where);
    } else if (key == "l1_bytes") {
      hw.l1_bytes = csv::parse_size(value, where);
    } else if (key == "l2_bytes") {
      hw.l2_bytes = csv::parse_size(value, where);
    } else if (key == "parallel_speedup") {
      hw.parallel_speedup = csv::parse_double(value, where);
    } else if (key == "power_active_w") {
      hw.power_active_w = csv::parse_double(value, where);
    } else if (key == "efficiency_mmac_per_s_per_mw") {
      hw.efficiency_mmac_per_s_per_mw = csv::parse_double(value, where);
    } else if (key == "dma_overhead_frac") {
      hw.dma_overhead_frac = csv::parse_double(value, where);
    } else if (key == "default_mac_per_cycle") {
      hw.default_mac_per_cycle = csv::parse_double(value, where);
    } else if (key == "fused_backward") {
      hw.fused_backward = csv::parse_bool(value, where);
    } else if (key.starts_with(kRatePrefix)) {
      const std::string_view rest = std::string_view(key).substr(kRatePrefix.size());
      const auto dot = rest.rfind('.');
      if (dot == std::string_view::npos || !valid_pass_key(rest.substr(dot + 1))) {
        throw FormatError("hardware profile " + where + ": expected mac_per_cycle.<kind>.<fwd|bwd|bwd_err|bwd_grad>");
      }
      nn::LayerKind kind;
      try {
        kind = nn::parse_layer_kind(rest.substr(0, dot));
      } catch (const Error& e) {
        throw FormatError("hardware profile " + where + ": " + e.what());
      }
      if (!nn::is_gemm_kind(kind)) throw FormatError("hardware profile " + where + ": throughput is for GEMM kinds");
      hw.mac_per_cycle[{kind, std::string(rest.substr(dot + 1))}] = csv::parse_double(value, where);
    } else {
      throw FormatError("hardware profile " + where + ": unknown key");
    }
  }
  hw.validate();
  return hw;
}

HwProfile load_hw_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open hardware profile '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_hw_profile(buffer.str());
}

std::string format_hw_profile(const HwProfile& hw) {
  std::string out;
  out += "name = " + hw.name + "\n";
  out += "cores = " + csv::number(hw.cores) + "\n";
  out += "freq_hz = " + csv::number(hw.freq_hz) + "\n";
  out += "l1_bytes = " + csv::number(hw.l1_bytes) + "\n";
  out += "l2_bytes = " + csv::number(hw.l2_bytes) + "\n";
  out += "parallel_speedup = " + csv::number(hw.parallel_speedup) + "\n";
  out += "power_active_w = " + csv::number(hw.power_active_w) + "\n";
  out += "efficiency_mmac_per_s_per_mw = " + csv::number(hw.efficiency_mmac_per_s_per_mw) + "\n";
  out += "dma_overhead_frac = " + csv::number(hw.dma_overhead_frac) + "\n";
  out += "default_mac_per_cycle = " + csv::number(hw.default_mac_per_cycle) + "\n";
  out += std::string("fused_backward = ") + (hw.fused_backward ? "true" : "false") + "\n";
  for (const auto& [key, value] : hw.mac_per_cycle) {
    out += std::string(kRatePrefix) + std::string(nn::to_string(key.first)) + "." + key.second + " = " +
           csv::number(value) + "\n";
  }
  return out;
}

TileEntry plan_tiles(const nn::LayerSpec& layer, const HwProfile& hw) {
  require_gemm(layer);
  TileEntry entry;
  entry.layer = layer.name;
  entry.c_out = layer.geom.c_out;
  entry.filter_bytes = layer.geom.patch_size() * sizeof(float);
  if (entry.filter_bytes > hw.l1_bytes) {
    throw InfeasibleError(fmt::format("layer '{}': one filter needs {} B but L1 holds {} B", layer.name,
                                      entry.filter_bytes, hw.l1_bytes));
  }
  const std::size_t fit = hw.l1_bytes / 2 / entry.filter_bytes;
  entry.double_buffered = fit >= 1;
  entry.c_tile = entry.double_buffered ? std::min(entry.c_out, fit) : 1;
  entry.tile_bytes = entry.c_tile * entry.filter_bytes;
  entry.n_tiles = (entry.c_out + entry.c_tile - 1) / entry.c_tile;
  return entry;
}

TileSchedule plan_network(const NetworkDescriptor& net, const HwProfile& hw, std::size_t begin) {
  TileSchedule schedule;
  for (std::size_t i = begin; i < net.layers.size(); ++i) {
    if (!nn::is_gemm_kind(net.layers[i].kind)) continue;
    try {
      schedule.entries.push_back(plan_tiles(net.layers[i], hw));
    } catch (const InfeasibleError& e) {
      schedule.infeasible.emplace_back(e.what());
    }
  }
  return schedule;
}

std::uint64_t layer_macs(const nn::LayerSpec& layer, Pass /*pass*/) {
  require_gemm(layer);
  return per_channel_macs(layer) * layer.geom.c_out;
}

std::uint64_t tiled_macs(const nn::LayerSpec& layer, const TileEntry& tiles, Pass pass) {
  require_gemm(layer);
  if (tiles.c_tile == 0) throw ArgumentError("tile entry for '" + layer.name + "' has c_tile = 0");
  (void)pass;
  std::uint64_t total = 0;
  for (std::size_t start = 0; start < layer.geom.c_out; start += tiles.c_tile) {
    total += per_channel_macs(layer) * std::min(tiles.c_tile, layer.geom.c_out - start);
  }
  return total;
}

std::uint64_t inference_macs(const NetworkDescriptor& net) {
  std::uint64_t total = 0;
  for (const nn::LayerSpec& layer : net.layers) {
    if (nn::is_gemm_kind(layer.kind)) total += layer_macs(layer, Pass::kForward);
  }
  return total;
}

LatencyReport estimate_latency(const NetworkDescriptor& net, std::size_t lr_cut, const replay::CLBatchPlan& plan,
                               const HwProfile& hw, LatencyOptions options) {
  hw.validate();
  if (lr_cut >= net.layers.size()) {
    throw ConfigError("cut index " + std::to_string(lr_cut) + " is past the last layer of '" + net.name + "'");
  }
  const TileSchedule schedule = plan_network(net, hw, lr_cut);
  if (!schedule.feasible()) throw InfeasibleError(schedule.infeasible.front());

  const double trained = static_cast<double>(plan.epochs) * static_cast<double>(plan.samples_per_epoch());
  const std::uint64_t trained_n = static_cast<std::uint64_t>(plan.epochs) * plan.samples_per_epoch();
  LatencyReport report;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const nn::LayerSpec& layer = net.layers[i];
    if (!nn::is_gemm_kind(layer.kind)) continue;
    const bool retrained = i >= lr_cut;
    if (!retrained && !options.include_frozen_forward) continue;

    LayerLatency row;
    row.name = layer.name;
    row.index = i;
    row.retrained = retrained;
    const std::uint64_t fwd = layer_macs(layer, Pass::kForward);
    if (!retrained) {
      row.fwd_cycles = static_cast<double>(plan.n_new) * static_cast<double>(fwd) / hw.rate(layer.kind, Pass::kForward);
      row.macs = plan.n_new * fwd;
    } else {
      row.fwd_cycles = trained * static_cast<double>(fwd) / hw.rate(layer.kind, Pass::kForward);
      row.macs = trained_n * fwd;
      const std::uint64_t grad = layer_macs(layer, Pass::kBackwardGrad);
      row.bwd_grad_cycles = trained * static_cast<double>(grad) / hw.rate(layer.kind, Pass::kBackwardGrad);
      row.macs += trained_n * grad;
      if (!hw.fused_backward && i > lr_cut) {
        const std::uint64_t err = layer_macs(layer, Pass::kBackwardError);
        row.bwd_err_cycles = trained * static_cast<double>(err) / hw.rate(layer.kind, Pass::kBackwardError);
        row.macs += trained_n * err;
      }
    }
    report.macs += row.macs;
    report.compute_cycles += row.cycles();
    report.layers.push_back(std::move(row));
  }
  report.total_cycles = report.compute_cycles * (1.0 + hw.dma_overhead_frac);
  report.seconds = report.total_cycles / hw.freq_hz;
  return report;
}

EnergyReport estimate_energy(double latency_s, std::uint64_t inference_macs, const HwProfile& hw,
                             const EnergyScenario& scenario) {
  if (latency_s < 0.0 || scenario.inferences_per_s < 0.0 || scenario.retrains_per_hour < 0.0) {
    throw ArgumentError("energy scenario rates and latency must be non-negative");
  }
  EnergyReport report;
  report.training_j_per_h = hw.power_active_w * latency_s * scenario.retrains_per_hour;
  if (scenario.inferences_per_s > 0.0) {
    if (!(hw.efficiency_mmac_per_s_per_mw > 0.0)) {
      throw ConfigError("hardware profile '" + hw.name + "' has no energy efficiency figure");
    }
    // MMAC/s/mW == 1e9 MAC/J
    const double joules_per_mac = 1.0 / (hw.efficiency_mmac_per_s_per_mw * 1e9);
    report.inference_j_per_h =
        scenario.inferences_per_s * 3600.0 * static_cast<double>(inference_macs) * joules_per_mac;
  }
  report.total_j_per_h = report.training_j_per_h + report.inference_j_per_h;
  return report;
}

double battery_hours(double capacity_mah, double volts, double joules_per_hour) {
  const double capacity_j = capacity_mah / 1000.0 * volts * 3600.0;
  if (joules_per_hour <= 0.0) return std::numeric_limits<double>::infinity();
  return capacity_j / joules_per_hour;
}

SpeedupReport speedup_report(const HwProfile& single, const HwProfile& multi) {
  std::set<std::pair<nn::LayerKind, std::string>> keys_single, keys_multi;
  for (const auto& [key, v] : single.mac_per_cycle) keys_single.insert(key);
  for (const auto& [key, v] : multi.mac_per_cycle) keys_multi.insert(key);
  if (keys_single != keys_multi) {
    throw ConfigError("profiles '" + single.name + "' and '" + multi.name + "' configure different kernel keys");
  }
  if (keys_single.empty()) throw ConfigError("profiles configure no kernel throughput entries");

  SpeedupReport report;
  double sum = 0.0;
  for (const auto& key : keys_single) {
    SpeedupEntry e;
    e.kind = key.first;
    e.pass = key.second;
    e.single = single.mac_per_cycle.at(key);
    e.multi = multi.mac_per_cycle.at(key);
    e.speedup = e.multi / e.single;
    if (e.speedup > static_cast<double>(multi.cores) * (1.0 + 1e-9)) {
      throw ConfigError(fmt::format("{}.{}: speedup {} exceeds {} cores", nn::to_string(e.kind), e.pass, e.speedup,
                                    multi.cores));
    }
    sum += e.speedup;
    report.entries.push_back(std::move(e));
  }
  report.average = sum / static_cast<double>(report.entries.size());
  return report;
}

void write_latency_csv(std::ostream& out, const LatencyReport& report) {
  out << "layer,index,retrained,macs,fwd_cycles,bwd_err_cycles,bwd_grad_cycles\n";
  for (const LayerLatency& row : report.layers) {
    out << csv::field(row.name) << ',' << row.index << ',' << (row.retrained ? 1 : 0) << ',' << row.macs << ','
        << csv::number(row.fwd_cycles) << ',' << csv::number(row.bwd_err_cycles) << ','
        << csv::number(row.bwd_grad_cycles) << '\n';
  }
}

}  // namespace edgecl::perf
