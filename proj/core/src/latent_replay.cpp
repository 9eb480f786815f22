#include "edgecl/latent_replay.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "edgecl/errors.hpp"

namespace edgecl::replay {

Tensor generate_latents(nn::Network& net, const Tensor& images, std::size_t cut, nn::ExecConfig exec) {
  if (cut >= net.size()) throw ConfigError("latent cut " + std::to_string(cut) + " is past the last layer");
  const Shape& in = net.input_shape();
  if (images.rank() != in.size() + 1 || Shape(images.dims().begin() + 1, images.dims().end()) != in) {
    throw ShapeError("images " + to_string(images.dims()) + " do not match network input " + to_string(in));
  }
  if (cut == 0) return images;
  return net.forward(images, 0, cut, nn::Mode::kInference, exec);
}

std::vector<EpochStream> compose_batches(const ReplayBuffer& buffer, std::span<const std::uint32_t> new_labels,
                                         const CLBatchPlan& plan, std::uint64_t seed) {
  if (new_labels.size() != plan.n_new) {
    throw ConfigError("plan expects " + std::to_string(plan.n_new) + " new samples, got " +
                      std::to_string(new_labels.size()));
  }
  const std::vector<std::uint32_t> classes = buffer.classes();
  if (plan.n_replay > 0 && classes.empty()) throw ConfigError("replay requested from an empty replay buffer");

  std::mt19937_64 rng(seed);
  // Per-class draw order, kept across epochs so each class is consumed
  // without replacement before any vector repeats.
  struct Cursor {
    std::vector<std::size_t> order;
    std::size_t next = 0;
  };
  std::map<std::uint32_t, Cursor> cursors;
  for (std::uint32_t id : classes) {
    Cursor c;
    c.order.resize(buffer.count(id));
    std::iota(c.order.begin(), c.order.end(), std::size_t{0});
    std::shuffle(c.order.begin(), c.order.end(), rng);
    cursors.emplace(id, std::move(c));
  }

  std::vector<EpochStream> epochs(plan.epochs);
  for (EpochStream& stream : epochs) {
    stream.reserve(plan.samples_per_epoch());
    for (std::size_t i = 0; i < plan.n_new; ++i) stream.push_back({false, new_labels[i], i});

    if (plan.n_replay > 0) {
      std::vector<std::size_t> share(classes.size(), plan.n_replay / classes.size());
      std::vector<std::size_t> pick(classes.size());
      std::iota(pick.begin(), pick.end(), std::size_t{0});
      std::shuffle(pick.begin(), pick.end(), rng);
      for (std::size_t r = 0; r < plan.n_replay % classes.size(); ++r) ++share[pick[r]];

      for (std::size_t k = 0; k < classes.size(); ++k) {
        Cursor& c = cursors.at(classes[k]);
        for (std::size_t n = 0; n < share[k]; ++n) {
          if (c.next == c.order.size()) {
            std::shuffle(c.order.begin(), c.order.end(), rng);
            c.next = 0;
          }
          stream.push_back({true, classes[k], c.order[c.next++]});
        }
      }
    }
    std::shuffle(stream.begin(), stream.end(), rng);
  }
  return epochs;
}

std::pair<Tensor, std::vector<std::uint32_t>> gather_batch(const ReplayBuffer& buffer, const Tensor& new_latents,
                                                           std::span<const std::uint32_t> new_labels,
                                                           std::span<const SampleRef> refs) {
  if (refs.empty()) throw ArgumentError("cannot gather an empty batch");
  std::vector<std::span<const float>> rows;
  std::vector<std::uint32_t> labels;
  rows.reserve(refs.size());
  labels.reserve(refs.size());
  for (const SampleRef& ref : refs) {
    if (ref.replay) {
      rows.push_back(buffer.vector(ref.class_id, ref.index));
      labels.push_back(ref.class_id);
    } else {
      if (ref.index >= new_latents.dim(0) || ref.index >= new_labels.size()) {
        throw ArgumentError("new sample index " + std::to_string(ref.index) + " out of range");
      }
      rows.push_back(new_latents.outer_slice(ref.index));
      labels.push_back(new_labels[ref.index]);
    }
  }
  return {nn::stack_samples(rows, buffer.vector_shape()), std::move(labels)};
}

LearnMetrics learn_new_class(nn::Network& net, ReplayBuffer& buffer, const Tensor& images,
                             std::span<const std::uint32_t> labels, const ar1::TrainConfig& cfg,
                             ar1::FisherBank& fisher, const LearnOptions& options) {
  cfg.validate();
  if (images.empty() || images.dim(0) != labels.size()) {
    throw ShapeError("need one label per image (" + std::to_string(images.empty() ? 0 : images.dim(0)) +
                     " images, " + std::to_string(labels.size()) + " labels)");
  }
  if (buffer.vector_shape() != net.latent_shape()) {
    throw ConfigError("replay vectors " + to_string(buffer.vector_shape()) + " do not match the latent shape " +
                      to_string(net.latent_shape()) + " at the current cut");
  }

  const Tensor latents = generate_latents(net, images, net.lr_cut(), options.exec);
  const CLBatchPlan plan{labels.size(), options.n_replay, cfg.epochs};
  const std::vector<EpochStream> epochs = compose_batches(buffer, labels, plan, options.seed);

  LearnMetrics metrics;
  metrics.new_samples = plan.n_new;
  metrics.replay_samples = plan.n_replay;
  for (const EpochStream& stream : epochs) {
    double weighted = 0.0;
    for (std::size_t start = 0; start < stream.size(); start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, stream.size() - start);
      auto [batch, batch_labels] = gather_batch(buffer, latents, labels, std::span(stream).subspan(start, n));
      weighted += ar1::train_batch(net, batch, batch_labels, cfg, fisher, options.exec) * static_cast<double>(n);
      metrics.presentations += n;
    }
    metrics.epoch_loss.push_back(stream.empty() ? 0.0 : weighted / static_cast<double>(stream.size()));
  }

  std::map<std::uint32_t, std::vector<std::span<const float>>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(latents.outer_slice(i));
  for (const auto& [id, rows] : by_class) buffer.insert_class(id, nn::stack_samples(rows, buffer.vector_shape()));
  return metrics;
}

}  // namespace edgecl::replay
