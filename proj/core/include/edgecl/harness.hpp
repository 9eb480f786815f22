#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgecl/ar1.hpp"
#include "edgecl/dataset.hpp"
#include "edgecl/descriptor.hpp"
#include "edgecl/latent_replay.hpp"
#include "edgecl/pareto.hpp"
#include "edgecl/perf_model.hpp"

namespace edgecl::harness {

struct PlanConfig {
  std::vector<std::string> cuts;  // empty: every GEMM layer
  replay::CLBatchPlan plan{};
  perf::LatencyOptions latency{};
  perf::EnergyScenario scenario{};
};

// One row per cut joining the memory and latency models with ingested
// accuracy, frontier flags set. Unknown cut names throw ConfigError listing
// the valid ones.
std::vector<ParetoRow> cmd_plan(const NetworkDescriptor& net, const perf::HwProfile& hw, const PlanConfig& config);

struct TrainTask {
  std::size_t classes = 5;
  std::size_t base_classes = 4;
  std::size_t train_per_class = 60;
  std::size_t test_per_class = 40;
  float noise = 0.6f;
  std::uint64_t seed = 1;
  std::string cut = "conv2/sep";
  std::size_t quota = 30;
  // Replay vectors per incremental step; 0 selects 5x the new samples.
  std::size_t n_replay = 0;
  bool replay = true;
  ar1::TrainConfig base{0.05f, 30, 16, 1.0f, 1e-3f};  // decay 1 keeps f = 0: plain SGD
  // A 1e-3 ceiling freezes nearly every weight after one step at this scale.
  ar1::TrainConfig incremental{0.05f, 8, 16, 0.9f, 1.0f};
  nn::ExecConfig exec{};

  void validate() const;
};

// Accuracy in percent over a class subset of the held-out set.
struct StepLog {
  std::size_t step = 0;
  long learned_class = -1;  // -1 for the base training step
  std::size_t seen_classes = 0;
  double acc_seen = 0.0;
  double acc_old = 0.0;  // classes seen before this step (NaN at the base step)
  double acc_new = 0.0;  // the class learned at this step
  double final_loss = 0.0;
  std::size_t presentations = 0;

  bool operator==(const StepLog& other) const;
};

struct TrainLog {
  std::vector<StepLog> steps;
  bool frozen_prefix_intact = true;
};

// Base classes trained from scratch on the full network, then one
// class-incremental step per remaining class with layers below the cut
// frozen and replay vectors (quota per class) mixed into each epoch.
TrainLog cmd_train(const NetworkDescriptor& net, const TrainTask& task);

void write_train_csv(std::ostream& out, const TrainLog& log);

enum class BenchKernel { kGemm, kConvForward, kConvBackwardError, kConvBackwardGrad };

// gemm, conv_fwd, conv_bwd_err, conv_bwd_grad; ArgumentError otherwise.
BenchKernel parse_bench_kernel(std::string_view name);
std::string_view to_string(BenchKernel kernel);

struct BenchRow {
  std::string kernel;
  std::size_t size = 0;
  std::size_t workers = 1;
  std::uint64_t macs = 0;
  double seconds = 0.0;  // best of the repeats
  double macs_per_s = 0.0;
  double speedup = 1.0;  // against the first worker count for this size
};

// gemm: size x size x size. conv kernels: 3x3 pad-1 convolution with size
// input and output channels on a 16x16 map. Times the best of `repeats`.
std::vector<BenchRow> cmd_bench(BenchKernel kernel, std::span<const std::size_t> sizes,
                                std::span<const std::size_t> workers, std::size_t repeats = 3);

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

}  // namespace edgecl::harness
