#include "edgecl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "edgecl/activations.hpp"
#include "edgecl/conv.hpp"
#include "edgecl/csv.hpp"
#include "edgecl/errors.hpp"
#include "edgecl/gemm.hpp"
#include "edgecl/memory_model.hpp"
#include "edgecl/network.hpp"

namespace edgecl::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

// Percent of samples in `data` (restricted to `classes`) predicted correctly.
double accuracy(nn::Network& net, const Dataset& data, std::span<const std::uint32_t> classes,
                nn::ExecConfig exec) {
  if (classes.empty()) return kNaN;
  const Dataset subset = select_classes(data, classes);
  const std::vector<std::uint32_t> predicted = nn::argmax_rows(net.predict_logits(subset.images, exec));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == subset.labels[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(predicted.size());
}

Tensor rows_of(const Tensor& images, std::span<const std::size_t> index) {
  std::vector<std::span<const float>> rows;
  rows.reserve(index.size());
  for (std::size_t i : index) rows.push_back(images.outer_slice(i));
  return nn::stack_samples(rows, Shape(images.dims().begin() + 1, images.dims().end()));
}

Tensor as_tensor(const std::vector<float>& v) { return v.empty() ? Tensor() : Tensor({v.size()}, v); }

struct FrozenSnapshot {
  std::vector<Tensor> tensors;

  static FrozenSnapshot take(const nn::Network& net) {
    FrozenSnapshot s;
    for (std::size_t i = 0; i < net.lr_cut(); ++i) {
      const nn::Layer& layer = net.layer(i);
      s.tensors.push_back(layer.weight());
      s.tensors.push_back(layer.bias());
      s.tensors.push_back(as_tensor(layer.running_stats().mean));
      s.tensors.push_back(as_tensor(layer.running_stats().var));
    }
    return s;
  }

  bool same_as(const FrozenSnapshot& other) const {
    if (tensors.size() != other.tensors.size()) return false;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (!bitwise_equal(tensors[i], other.tensors[i])) return false;
    }
    return true;
  }
};

}  // namespace

std::vector<ParetoRow> cmd_plan(const NetworkDescriptor& net, const perf::HwProfile& hw, const PlanConfig& config) {
  net.validate();
  std::vector<std::size_t> cuts;
  if (config.cuts.empty()) {
    cuts = net.candidate_cuts();
  } else {
    for (const std::string& name : config.cuts) cuts.push_back(net.resolve_cut(name));
  }
  if (cuts.empty()) throw ConfigError("no cuts to plan for '" + net.name + "'");

  const std::uint64_t infer_macs = perf::inference_macs(net);
  std::vector<ParetoRow> rows;
  for (std::size_t cut : cuts) {
    const memory::FootprintReport mem = memory::footprint(net, cut, config.plan.n_replay, config.plan.n_new);
    const perf::LatencyReport lat = perf::estimate_latency(net, cut, config.plan, hw, config.latency);
    const perf::EnergyReport energy = perf::estimate_energy(lat.seconds, infer_macs, hw, config.scenario);

    ParetoRow row;
    row.cut = net.layers[cut].name;
    row.lr_cut = cut;
    row.ram_bytes = mem.ram_total_bytes;
    row.flash_bytes = mem.flash_bytes;
    row.latency_s = lat.seconds;
    row.energy_j_per_h = energy.total_j_per_h;
    row.accuracy_pct = kNaN;
    for (const auto& [name, pct] : net.accuracy_by_cut) {
      if (net.resolve_cut(name) == cut) {
        row.accuracy_pct = pct;
        row.accuracy_source = "ingested";
      }
    }
    rows.push_back(std::move(row));
  }
  mark_frontier(rows);
  return rows;
}

void TrainTask::validate() const {
  if (classes < 2) throw ConfigError("the task needs at least two classes");
  if (base_classes < 1 || base_classes >= classes) throw ConfigError("base_classes must lie in [1, classes)");
  if (train_per_class == 0 || test_per_class == 0) throw ConfigError("need train and test samples per class");
  base.validate();
  incremental.validate();
}

bool StepLog::operator==(const StepLog& o) const {
  return step == o.step && learned_class == o.learned_class && seen_classes == o.seen_classes &&
         same_double(acc_seen, o.acc_seen) && same_double(acc_old, o.acc_old) && same_double(acc_new, o.acc_new) &&
         same_double(final_loss, o.final_loss) && presentations == o.presentations;
}

TrainLog cmd_train(const NetworkDescriptor& desc, const TrainTask& task) {
  task.validate();
  desc.validate();
  nn::Network probe_shape = nn::Network::from_descriptor(desc, task.seed);
  if (probe_shape.classes() < task.classes) {
    throw ConfigError("network '" + desc.name + "' has " + std::to_string(probe_shape.classes()) +
                      " outputs for a " + std::to_string(task.classes) + "-class task");
  }
  nn::Network net = std::move(probe_shape);

  // One draw so train and test share the class prototypes.
  const std::size_t per_class = task.train_per_class + task.test_per_class;
  const Dataset all = synth_dataset(task.classes, per_class, desc.input_shape, task.noise, task.seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (i % per_class < task.train_per_class ? train_idx : test_idx).push_back(i);
  }
  auto take = [&](std::span<const std::size_t> idx) {
    Dataset d;
    d.classes = all.classes;
    d.images = rows_of(all.images, idx);
    for (std::size_t i : idx) d.labels.push_back(all.labels[i]);
    return d;
  };
  const Dataset train = take(train_idx);
  const Dataset test = take(test_idx);

  std::vector<std::uint32_t> seen(task.base_classes);
  std::iota(seen.begin(), seen.end(), std::uint32_t{0});
  TrainLog log;
  StepLog base_step;

  // Base classes: every layer trainable.
  {
    const Dataset base = select_classes(train, seen);
    net.set_lr_cut(0);
    ar1::FisherBank fisher;
    std::mt19937_64 rng(task.seed ^ 0x5eedULL);
    std::vector<std::size_t> order(base.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < task.base.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double weighted = 0.0;
      for (std::size_t start = 0; start < order.size(); start += task.base.batch_size) {
        const std::size_t n = std::min(task.base.batch_size, order.size() - start);
        const std::span<const std::size_t> idx(order.data() + start, n);
        std::vector<std::uint32_t> labels;
        for (std::size_t i : idx) labels.push_back(base.labels[i]);
        weighted += ar1::train_batch(net, rows_of(base.images, idx), labels, task.base, fisher, task.exec) *
                    static_cast<double>(n);
        base_step.presentations += n;
      }
      base_step.final_loss = weighted / static_cast<double>(order.size());
    }
  }
  base_step.seen_classes = seen.size();
  base_step.acc_seen = accuracy(net, test, seen, task.exec);
  base_step.acc_old = kNaN;
  base_step.acc_new = base_step.acc_seen;
  log.steps.push_back(base_step);

  net.set_lr_cut(desc.resolve_cut(task.cut));
  replay::ReplayBuffer buffer(net.latent_shape(), task.quota);
  for (std::uint32_t c : seen) {
    const std::uint32_t one[] = {c};
    const Dataset cls = select_classes(train, one);
    buffer.insert_class(c, replay::generate_latents(net, cls.images, net.lr_cut(), task.exec));
  }

  ar1::FisherBank fisher;
  for (std::uint32_t k = static_cast<std::uint32_t>(task.base_classes); k < task.classes; ++k) {
    const std::uint32_t one[] = {k};
    const Dataset cls = select_classes(train, one);
    replay::LearnOptions options;
    options.n_replay = !task.replay ? 0 : task.n_replay ? task.n_replay : 5 * cls.size();
    options.seed = task.seed + k;
    options.exec = task.exec;

    const FrozenSnapshot before = FrozenSnapshot::take(net);
    const replay::LearnMetrics metrics =
        replay::learn_new_class(net, buffer, cls.images, cls.labels, task.incremental, fisher, options);
    if (!before.same_as(FrozenSnapshot::take(net))) log.frozen_prefix_intact = false;

    StepLog step;
    step.step = log.steps.size();
    step.learned_class = static_cast<long>(k);
    step.acc_old = accuracy(net, test, seen, task.exec);
    seen.push_back(k);
    step.seen_classes = seen.size();
    step.acc_seen = accuracy(net, test, seen, task.exec);
    step.acc_new = accuracy(net, test, one, task.exec);
    step.final_loss = metrics.epoch_loss.empty() ? kNaN : metrics.epoch_loss.back();
    step.presentations = metrics.presentations;
    log.steps.push_back(step);
  }
  return log;
}

void write_train_csv(std::ostream& out, const TrainLog& log) {
  out << "step,learned_class,seen_classes,acc_seen,acc_old,acc_new,final_loss,presentations\n";
  for (const StepLog& s : log.steps) {
    out << s.step << ',' << s.learned_class << ',' << s.seen_classes << ',' << csv::number(s.acc_seen) << ','
        << csv::number(s.acc_old) << ',' << csv::number(s.acc_new) << ',' << csv::number(s.final_loss) << ','
        << s.presentations << '\n';
  }
}

BenchKernel parse_bench_kernel(std::string_view name) {
  if (name == "gemm") return BenchKernel::kGemm;
  if (name == "conv_fwd") return BenchKernel::kConvForward;
  if (name == "conv_bwd_err") return BenchKernel::kConvBackwardError;
  if (name == "conv_bwd_grad") return BenchKernel::kConvBackwardGrad;
  throw ArgumentError("unknown kernel '" + std::string(name) +
                      "' (expected gemm, conv_fwd, conv_bwd_err or conv_bwd_grad)");
}

std::string_view to_string(BenchKernel kernel) {
  switch (kernel) {
    case BenchKernel::kGemm:
      return "gemm";
    case BenchKernel::kConvForward:
      return "conv_fwd";
    case BenchKernel::kConvBackwardError:
      return "conv_bwd_err";
    case BenchKernel::kConvBackwardGrad:
      return "conv_bwd_grad";
  }
  return "?";
}

std::vector<BenchRow> cmd_bench(BenchKernel kernel, std::span<const std::size_t> sizes,
                                std::span<const std::size_t> workers, std::size_t repeats) {
  if (sizes.empty() || workers.empty()) throw ArgumentError("bench needs at least one size and worker count");
  if (repeats == 0) throw ArgumentError("bench needs at least one repeat");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  auto random = [&](Shape dims) {
    Tensor t(std::move(dims));
    for (float& v : t.values()) v = dist(rng);
    return t;
  };

  std::vector<BenchRow> rows;
  for (std::size_t size : sizes) {
    if (size == 0) throw ArgumentError("bench sizes must be positive");
    const nn::LayerSpec spec = nn::make_conv("bench", {size, 16, 16}, size, 3, 1, 1);
    Tensor a, b, weight, act, err;
    std::uint64_t macs = 0;
    if (kernel == BenchKernel::kGemm) {
      a = random({size, size});
      b = random({size, size});
      macs = static_cast<std::uint64_t>(size) * size * size;
    } else {
      weight = random(spec.weight_dims());
      act = random(nn::batched(spec.in_shape, 1));
      err = random(nn::batched(spec.out_shape, 1));
      macs = perf::layer_macs(spec, perf::Pass::kForward);
    }

    double baseline = 0.0;
    for (std::size_t w : workers) {
      if (w == 0) throw ArgumentError("worker counts must be positive");
      const nn::ExecConfig exec{w, 0};
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        switch (kernel) {
          case BenchKernel::kGemm:
            (void)gemm(a, b, w);
            break;
          case BenchKernel::kConvForward:
            (void)nn::conv_forward(spec, act, weight, Tensor(), exec);
            break;
          case BenchKernel::kConvBackwardError:
            (void)nn::conv_backward_error(spec, err, weight, exec);
            break;
          case BenchKernel::kConvBackwardGrad:
            (void)nn::conv_backward_grad(spec, act, err, exec);
            break;
        }
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
      BenchRow row;
      row.kernel = std::string(to_string(kernel));
      row.size = size;
      row.workers = w;
      row.macs = macs;
      row.seconds = best;
      row.macs_per_s = best > 0.0 ? static_cast<double>(macs) / best : 0.0;
      if (baseline == 0.0) baseline = best;
      row.speedup = best > 0.0 ? baseline / best : 1.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << "kernel,size,workers,macs,seconds,macs_per_s,speedup\n";
  for (const BenchRow& r : rows) {
    out << r.kernel << ',' << r.size << ',' << r.workers << ',' << r.macs << ',' << csv::number(r.seconds) << ','
        << csv::number(r.macs_per_s) << ',' << csv::number(r.speedup) << '\n';
  }
}

}  // namespace edgecl::harness
