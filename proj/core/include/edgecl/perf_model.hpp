#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edgecl/descriptor.hpp"
#include "edgecl/latent_replay.hpp"

namespace edgecl::perf {

enum class Pass { kForward, kBackwardError, kBackwardGrad };

std::string_view to_string(Pass pass);

// Throughput table key spelling: fwd, bwd (both backward passes), bwd_err,
// bwd_grad.
inline constexpr std::string_view kSharedBackward = "bwd";

// Calibrated description of a target. Throughput is looked up per (layer
// kind, pass): an explicit bwd_err/bwd_grad entry wins over the shared
// `bwd` entry, and anything unset falls back to default_mac_per_cycle.
struct HwProfile {
  std::string name = "unnamed";
  std::size_t cores = 1;
  double freq_hz = 0.0;
  std::size_t l1_bytes = 0;
  std::size_t l2_bytes = 0;
  double parallel_speedup = 1.0;
  double power_active_w = 0.0;
  double efficiency_mmac_per_s_per_mw = 0.0;
  double dma_overhead_frac = 0.05;
  double default_mac_per_cycle = 1.84;
  // Cost the backward step of a retrained layer as one forward-sized GEMM at
  // the backward rate instead of separate error and gradient GEMMs.
  bool fused_backward = false;
  // (kind, "fwd" | "bwd" | "bwd_err" | "bwd_grad") -> MAC/cycle
  std::map<std::pair<nn::LayerKind, std::string>, double> mac_per_cycle;

  double rate(nn::LayerKind kind, Pass pass) const;
  // ConfigError when an invariant does not hold.
  void validate() const;
};

// key = value lines, '#' comments. Keys: name, cores, freq_hz, l1_bytes,
// l2_bytes, parallel_speedup, power_active_w, efficiency_mmac_per_s_per_mw,
// dma_overhead_frac, default_mac_per_cycle, fused_backward and
// mac_per_cycle.<kind>.<fwd|bwd|bwd_err|bwd_grad>.
HwProfile parse_hw_profile(std::string_view text);
HwProfile load_hw_profile(const std::filesystem::path& path);
std::string format_hw_profile(const HwProfile& hw);

// Coefficients sliced along C_out: c_tile filters per transfer.
struct TileEntry {
  std::string layer;
  std::size_t c_out = 0;
  std::size_t c_tile = 0;
  std::size_t filter_bytes = 0;  // one output channel's coefficients
  std::size_t tile_bytes = 0;    // c_tile * filter_bytes
  std::size_t n_tiles = 0;
  bool double_buffered = false;

  bool operator==(const TileEntry&) const = default;
};

// Largest c_tile with 2 * tile_bytes <= L1 (ping-pong buffers). A filter
// that fits L1 once but not twice gets single-buffered c_tile = 1; one that
// does not fit at all throws InfeasibleError. GEMM kinds only.
TileEntry plan_tiles(const nn::LayerSpec& layer, const HwProfile& hw);

struct TileSchedule {
  std::vector<TileEntry> entries;
  std::vector<std::string> infeasible;  // layer names with their reason

  bool feasible() const noexcept { return infeasible.empty(); }
};

// Plans every GEMM layer from index `begin`, collecting infeasible layers
// instead of stopping at the first.
TileSchedule plan_network(const NetworkDescriptor& net, const HwProfile& hw, std::size_t begin = 0);

// Multiply-accumulates for one sample. Backward passes cost the same as the
// forward pass for these kinds. ArgumentError for non-GEMM kinds.
std::uint64_t layer_macs(const nn::LayerSpec& layer, Pass pass);
// Same total, summed tile by tile.
std::uint64_t tiled_macs(const nn::LayerSpec& layer, const TileEntry& tiles, Pass pass);
// One inference: forward MACs of every GEMM layer.
std::uint64_t inference_macs(const NetworkDescriptor& net);

struct LatencyOptions {
  // Count the one-off forward pass of the new images through the frozen
  // layers below the cut.
  bool include_frozen_forward = false;
};

struct LayerLatency {
  std::string name;
  std::size_t index = 0;
  bool retrained = false;
  std::uint64_t macs = 0;  // all samples, all passes
  double fwd_cycles = 0.0;
  double bwd_err_cycles = 0.0;
  double bwd_grad_cycles = 0.0;

  double cycles() const noexcept { return fwd_cycles + bwd_err_cycles + bwd_grad_cycles; }
};

struct LatencyReport {
  std::vector<LayerLatency> layers;  // GEMM layers that contribute
  std::uint64_t macs = 0;
  double compute_cycles = 0.0;
  double total_cycles = 0.0;  // with the DMA overhead fraction
  double seconds = 0.0;
};

// Cycles = sum over samples and GEMM layers of macs / mac_per_cycle: every
// retrained layer sees epochs * (n_new + n_replay) forward and backward
// passes (no error pass at the cut itself), frozen layers optionally see
// n_new forward passes. Then x (1 + dma_overhead_frac) / freq_hz. Non-GEMM
// layers are folded into the overhead fraction. Propagates InfeasibleError
// when a retrained layer cannot be tiled.
LatencyReport estimate_latency(const NetworkDescriptor& net, std::size_t lr_cut, const replay::CLBatchPlan& plan,
                               const HwProfile& hw, LatencyOptions options = {});

struct EnergyScenario {
  double inferences_per_s = 1.0;
  double retrains_per_hour = 1.0;
};

struct EnergyReport {
  double training_j_per_h = 0.0;
  double inference_j_per_h = 0.0;
  double total_j_per_h = 0.0;
};

// Training: power_active_w * latency_s * retrains/h. Inference:
// inferences/h * macs / (efficiency in MAC/J). ArgumentError on negative rates.
EnergyReport estimate_energy(double latency_s, std::uint64_t inference_macs, const HwProfile& hw,
                             const EnergyScenario& scenario);

// capacity_mAh * volts * 3.6 J / joules_per_hour; infinite at zero drain.
double battery_hours(double capacity_mah, double volts, double joules_per_hour);

struct SpeedupEntry {
  nn::LayerKind kind = nn::LayerKind::kPointwise;
  std::string pass;
  double single = 0.0;
  double multi = 0.0;
  double speedup = 0.0;
};

struct SpeedupReport {
  std::vector<SpeedupEntry> entries;
  double average = 0.0;
};

// Ratio of configured throughput entries. Both profiles must configure the
// same keys (ConfigError otherwise); a ratio above multi.cores is rejected.
SpeedupReport speedup_report(const HwProfile& single, const HwProfile& multi);

// layer,index,retrained,macs,fwd_cycles,bwd_err_cycles,bwd_grad_cycles
void write_latency_csv(std::ostream& out, const LatencyReport& report);

}  // namespace edgecl::perf
