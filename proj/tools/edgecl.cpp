// edgecl: plan, train, bench, footprint and energy reports.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "edgecl/errors.hpp"
#include "edgecl/harness.hpp"
#include "edgecl/memory_model.hpp"
#include "edgecl/perf_model.hpp"

namespace {

namespace fs = std::filesystem;
using namespace edgecl;

const fs::path kDataDir = EDGECL_DATA_DIR;

struct Common {
  std::string net = (kDataDir / "mobilenet_v1_128.net").string();
  std::string hw = (kDataDir / "pulp_cluster_8c.hw").string();
  std::vector<std::string> cuts;
  std::size_t n_replay = 1500;
  std::size_t n_new = 300;
  std::size_t epochs = 8;
  std::string csv;
  bool include_frozen_forward = false;
};

// "-" is stdout; an empty path means no CSV.
template <typename Fn>
void with_csv(const std::string& path, Fn&& write) {
  if (path.empty()) return;
  if (path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write(out);
}

// The human-readable table moves to stderr when the CSV goes to stdout.
std::FILE* table_stream(const std::string& csv_path) { return csv_path == "-" ? stderr : stdout; }

std::string mb(std::size_t bytes) { return fmt::format("{:.1f}", static_cast<double>(bytes) / 1e6); }

std::string accuracy_text(double pct) { return std::isnan(pct) ? "-" : fmt::format("{:.1f}", pct); }

replay::CLBatchPlan batch_plan(const Common& c) { return {c.n_new, c.n_replay, c.epochs}; }

std::vector<std::size_t> resolve_cuts(const NetworkDescriptor& net, const std::vector<std::string>& names) {
  if (names.empty()) return net.candidate_cuts();
  std::vector<std::size_t> cuts;
  for (const auto& name : names) cuts.push_back(net.resolve_cut(name));
  return cuts;
}

int run_plan(const Common& c, const std::string& plot) {
  std::FILE* text = table_stream(c.csv);
  const NetworkDescriptor net = load_descriptor(c.net);
  const perf::HwProfile hw = perf::load_hw_profile(c.hw);
  harness::PlanConfig config;
  config.cuts = c.cuts;
  config.plan = batch_plan(c);
  config.latency.include_frozen_forward = c.include_frozen_forward;
  const auto rows = harness::cmd_plan(net, hw, config);

  fmt::print(text, "# {} on {}; accuracy is ingested metadata, not measured\n", net.name, hw.name);
  fmt::print(text, "{:<18} {:>9} {:>10} {:>12} {:>10} {:>8} {}\n", "cut", "ram_MB", "flash_MB", "latency_s", "J/h",
             "acc_%", "frontier");
  for (const auto& r : rows) {
    fmt::print(text, "{:<18} {:>9} {:>10} {:>12.4g} {:>10.4g} {:>8} {}\n", r.cut, mb(r.ram_bytes), mb(r.flash_bytes),
               r.latency_s, r.energy_j_per_h, accuracy_text(r.accuracy_pct), r.frontier ? "*" : "");
  }
  with_csv(c.csv, [&](std::ostream& out) { harness::write_pareto_csv(out, rows); });
  with_csv(plot, [&](std::ostream& out) { harness::write_pareto_plot(out, rows); });
  return 0;
}

int run_footprint(const Common& c, std::optional<double> budget_mb) {
  std::FILE* text = table_stream(c.csv);
  const NetworkDescriptor net = load_descriptor(c.net);
  const auto cuts = resolve_cuts(net, c.cuts);
  std::vector<memory::FootprintReport> reports;
  if (budget_mb) {
    const auto budget = static_cast<std::size_t>(*budget_mb * 1e6);
    reports = memory::pareto_memory(net, cuts, budget, c.n_replay, c.n_new);
    fmt::print(text, "# cuts within {} MB of RAM: {}\n", *budget_mb, reports.size());
  } else {
    for (std::size_t cut : cuts) reports.push_back(memory::footprint(net, cut, c.n_replay, c.n_new));
  }
  fmt::print(text, "{:<18} {:>10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}\n", "cut", "flash_MB", "n_w", "n_a", "n_g",
             "n_fi", "n_fw", "new_lat", "ram_MB");
  for (const auto& r : reports) {
    fmt::print(text, "{:<18} {:>10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}\n", r.cut_name, mb(r.flash_bytes),
               mb(r.ram.n_w), mb(r.ram.n_a), mb(r.ram.n_g), mb(r.ram.n_fi), mb(r.ram.n_fw), mb(r.ram.new_latents),
               mb(r.ram_total_bytes));
  }
  with_csv(c.csv, [&](std::ostream& out) { memory::write_footprint_csv(out, reports); });
  return 0;
}

struct EnergyArgs {
  double inferences_per_s = 1.0;
  double retrains_per_hour = 1.0;
  double battery_mah = 3100.0;
  double volts = 3.7;
};

int run_energy(const Common& c, const EnergyArgs& e) {
  std::FILE* text = table_stream(c.csv);
  const NetworkDescriptor net = load_descriptor(c.net);
  const perf::HwProfile hw = perf::load_hw_profile(c.hw);
  const auto cuts = resolve_cuts(net, c.cuts.empty() ? std::vector<std::string>{"mid_fc7"} : c.cuts);
  const std::uint64_t infer = perf::inference_macs(net);
  std::vector<std::string> lines;
  fmt::print(text, "# {} on {}: {} inference/s, {} retrain/h, {} mAh at {} V\n", net.name, hw.name, e.inferences_per_s,
             e.retrains_per_hour, e.battery_mah, e.volts);
  fmt::print(text, "{:<18} {:>12} {:>12} {:>12} {:>12} {:>10}\n", "cut", "latency_s", "train_J/h", "infer_J/h", "total_J/h",
             "battery_h");
  for (std::size_t cut : cuts) {
    const auto lat = perf::estimate_latency(net, cut, batch_plan(c), hw, {c.include_frozen_forward});
    const auto energy = perf::estimate_energy(lat.seconds, infer, hw, {e.inferences_per_s, e.retrains_per_hour});
    const double hours = perf::battery_hours(e.battery_mah, e.volts, energy.total_j_per_h);
    fmt::print(text, "{:<18} {:>12.4g} {:>12.4g} {:>12.4g} {:>12.4g} {:>10.4g}\n", net.layers[cut].name, lat.seconds,
               energy.training_j_per_h, energy.inference_j_per_h, energy.total_j_per_h, hours);
    lines.push_back(fmt::format("{},{},{},{},{},{}", net.layers[cut].name, lat.seconds, energy.training_j_per_h,
                                energy.inference_j_per_h, energy.total_j_per_h, hours));
  }
  with_csv(c.csv, [&](std::ostream& out) {
    out << "cut,latency_s,training_j_per_h,inference_j_per_h,total_j_per_h,battery_h\n";
    for (const auto& l : lines) out << l << '\n';
  });
  return 0;
}

int run_train(const Common& c, harness::TrainTask task, bool no_replay, std::optional<std::size_t> n_replay,
              std::optional<std::size_t> n_new, std::optional<std::size_t> epochs) {
  std::FILE* text = table_stream(c.csv);
  const NetworkDescriptor net = load_descriptor(c.net);
  if (!c.cuts.empty()) task.cut = c.cuts.front();
  task.replay = !no_replay;
  if (n_replay) task.n_replay = *n_replay;
  if (n_new) task.train_per_class = *n_new;
  if (epochs) task.incremental.epochs = *epochs;
  const harness::TrainLog log = harness::cmd_train(net, task);

  fmt::print(text, "# {} classes ({} base), cut {}, replay {}, seed {}; accuracy measured on held-out synthetic data\n",
             task.classes, task.base_classes, task.cut, task.replay ? "on" : "off", task.seed);
  fmt::print(text, "{:>4} {:>7} {:>5} {:>9} {:>9} {:>9} {:>10}\n", "step", "class", "seen", "acc_seen", "acc_old",
             "acc_new", "loss");
  for (const auto& s : log.steps) {
    fmt::print(text, "{:>4} {:>7} {:>5} {:>9} {:>9} {:>9} {:>10.4f}\n", s.step,
               s.learned_class < 0 ? std::string("base") : std::to_string(s.learned_class), s.seen_classes,
               accuracy_text(s.acc_seen), accuracy_text(s.acc_old), accuracy_text(s.acc_new), s.final_loss);
  }
  fmt::print(text, "frozen prefix intact: {}\n", log.frozen_prefix_intact ? "yes" : "no");
  with_csv(c.csv, [&](std::ostream& out) { harness::write_train_csv(out, log); });
  return 0;
}

int run_bench(const std::string& kernel, const std::vector<std::size_t>& sizes,
              const std::vector<std::size_t>& workers, std::size_t repeats, const std::string& csv_path) {
  std::FILE* text = table_stream(csv_path);
  const auto rows = harness::cmd_bench(harness::parse_bench_kernel(kernel), sizes, workers, repeats);
  fmt::print(text, "{:<14} {:>6} {:>8} {:>14} {:>12} {:>12} {:>8}\n", "kernel", "size", "workers", "macs", "seconds",
             "MMAC/s", "speedup");
  for (const auto& r : rows) {
    fmt::print(text, "{:<14} {:>6} {:>8} {:>14} {:>12.4g} {:>12.1f} {:>8.2f}\n", r.kernel, r.size, r.workers, r.macs,
               r.seconds, r.macs_per_s / 1e6, r.speedup);
  }
  with_csv(csv_path, [&](std::ostream& out) { harness::write_bench_csv(out, rows); });
  return 0;
}

void add_model_flags(CLI::App* cmd, Common& c, bool with_hw) {
  cmd->add_option("--net", c.net, "network descriptor")->capture_default_str();
  if (with_hw) cmd->add_option("--hw", c.hw, "hardware profile")->capture_default_str();
  cmd->add_option("--cut", c.cuts, "cut layer name (repeatable; default: every GEMM layer)");
  cmd->add_option("--replay", c.n_replay, "replay vectors per step")->capture_default_str();
  cmd->add_option("--new", c.n_new, "new images per step")->capture_default_str();
  cmd->add_option("--csv", c.csv, "write the report as CSV ('-' for stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-replay continual learning planner and trainer"};
  app.require_subcommand(1);

  Common plan_args, foot_args, energy_args, train_args;
  std::string plot;
  auto* plan = app.add_subcommand("plan", "memory / latency / accuracy table per cut with Pareto flags");
  add_model_flags(plan, plan_args, true);
  plan->add_option("--epochs", plan_args.epochs, "epochs per step")->capture_default_str();
  plan->add_flag("--include-frozen-forward", plan_args.include_frozen_forward,
                 "count the forward pass of new images through the frozen layers");
  plan->add_option("--plot", plot, "write a gnuplot data file");

  std::optional<double> budget_mb;
  auto* foot = app.add_subcommand("footprint", "FLASH and RAM breakdown per cut");
  add_model_flags(foot, foot_args, false);
  foot->add_option("--budget-mb", budget_mb, "keep only cuts within this RAM budget");

  EnergyArgs energy;
  auto* en = app.add_subcommand("energy", "energy per hour and battery life");
  add_model_flags(en, energy_args, true);
  en->add_option("--epochs", energy_args.epochs, "epochs per step")->capture_default_str();
  en->add_flag("--include-frozen-forward", energy_args.include_frozen_forward,
               "count the forward pass of new images through the frozen layers");
  en->add_option("--inferences-per-s", energy.inferences_per_s)->capture_default_str();
  en->add_option("--retrains-per-hour", energy.retrains_per_hour)->capture_default_str();
  en->add_option("--battery-mah", energy.battery_mah)->capture_default_str();
  en->add_option("--volts", energy.volts)->capture_default_str();

  harness::TrainTask task;
  train_args.net = (kDataDir / "desk_cnn.net").string();
  bool no_replay = false;
  std::optional<std::size_t> train_replay, train_new, train_epochs;
  auto* train = app.add_subcommand("train", "class-incremental run on a synthetic task");
  train->add_option("--net", train_args.net, "network descriptor")->capture_default_str();
  train->add_option("--cut", train_args.cuts, "cut layer name")->expected(1);
  train->add_option("--replay", train_replay, "replay vectors per step (default 5x new)");
  train->add_option("--new", train_new, "training images per class");
  train->add_option("--epochs", train_epochs, "epochs per incremental step");
  train->add_option("--seed", task.seed)->capture_default_str();
  train->add_option("--classes", task.classes)->capture_default_str();
  train->add_option("--base", task.base_classes, "classes learned before the incremental steps")
      ->capture_default_str();
  train->add_option("--quota", task.quota, "replay vectors kept per class")->capture_default_str();
  train->add_option("--noise", task.noise)->capture_default_str();
  train->add_option("--lr", task.incremental.learning_rate, "incremental learning rate")->capture_default_str();
  train->add_option("--fisher-decay", task.incremental.fisher_decay)->capture_default_str();
  train->add_option("--fisher-clip", task.incremental.fisher_clip)->capture_default_str();
  train->add_flag("--no-replay", no_replay, "ablation: train on the new class only");
  train->add_option("--csv", train_args.csv, "write the step log as CSV ('-' for stdout)");

  std::string kernel = "gemm";
  std::vector<std::size_t> sizes{64, 256};
  std::vector<std::size_t> workers{1, 2, 4, 8};
  std::size_t repeats = 3;
  std::string bench_csv;
  auto* bench = app.add_subcommand("bench", "host throughput of the GEMM kernels");
  bench->add_option("--kernel", kernel, "gemm | conv_fwd | conv_bwd_err | conv_bwd_grad")->capture_default_str();
  bench->add_option("--sizes", sizes)->capture_default_str();
  bench->add_option("--workers", workers)->capture_default_str();
  bench->add_option("--repeats", repeats)->capture_default_str();
  bench->add_option("--csv", bench_csv, "write the table as CSV ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return run_plan(plan_args, plot);
    if (*foot) return run_footprint(foot_args, budget_mb);
    if (*en) return run_energy(energy_args, energy);
    if (*train) return run_train(train_args, task, no_replay, train_replay, train_new, train_epochs);
    if (*bench) return run_bench(kernel, sizes, workers, repeats, bench_csv);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 64;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
