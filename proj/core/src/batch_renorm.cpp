#include "edgecl/batch_renorm.hpp"

#include <algorithm>
#include <cmath>

#include "edgecl/errors.hpp"

namespace edgecl::nn {

namespace {

struct Layout {
  std::size_t batch, channels, plane;
};

Layout layout_of(const Tensor& t) {
  if (t.rank() != 4) throw ShapeError("batch renorm expects N x C x H x W, got " + to_string(t.dims()));
  return {t.dim(0), t.dim(1), t.dim(2) * t.dim(3)};
}

template <typename Fn>
void for_channel(const Layout& l, std::size_t c, Fn&& fn) {
  for (std::size_t n = 0; n < l.batch; ++n) {
    const std::size_t base = (n * l.channels + c) * l.plane;
    for (std::size_t p = 0; p < l.plane; ++p) fn(base + p);
  }
}

}  // namespace

RenormStats RenormStats::identity(std::size_t channels) {
  return {std::vector<float>(channels, 0.0f), std::vector<float>(channels, 1.0f)};
}

Tensor batch_renorm_forward(const Tensor& act_in, const Tensor& gamma, const Tensor& beta, RenormStats& running,
                            const RenormConfig& config, bool training, RenormCache* cache) {
  const Layout l = layout_of(act_in);
  if (gamma.size() != l.channels || beta.size() != l.channels || running.mean.size() != l.channels ||
      running.var.size() != l.channels) {
    throw ShapeError("batch renorm parameters do not match " + std::to_string(l.channels) + " channels");
  }
  Tensor out(act_in.dims());

  if (!training) {
    for (std::size_t c = 0; c < l.channels; ++c) {
      const float mean = running.mean[c];
      const float inv_std = 1.0f / std::sqrt(running.var[c] + config.epsilon);
      for_channel(l, c, [&](std::size_t i) { out[i] = gamma[c] * ((act_in[i] - mean) * inv_std) + beta[c]; });
    }
    return out;
  }

  RenormCache scratch;
  if (cache == nullptr) cache = &scratch;
  cache->normalized = Tensor(act_in.dims());
  cache->batch_std.assign(l.channels, 0.0f);
  cache->r.assign(l.channels, 1.0f);
  cache->d.assign(l.channels, 0.0f);
  const double count = static_cast<double>(l.batch * l.plane);

  for (std::size_t c = 0; c < l.channels; ++c) {
    double sum = 0.0;
    for_channel(l, c, [&](std::size_t i) { sum += act_in[i]; });
    const double mean = sum / count;
    double sq = 0.0;
    for_channel(l, c, [&](std::size_t i) {
      const double dv = act_in[i] - mean;
      sq += dv * dv;
    });
    const double var = sq / count;
    const double batch_std = std::sqrt(var + config.epsilon);
    const double running_std = std::sqrt(static_cast<double>(running.var[c]) + config.epsilon);
    const double r = std::clamp(batch_std / running_std, 1.0 / config.r_max, static_cast<double>(config.r_max));
    const double d = std::clamp((mean - running.mean[c]) / running_std, -static_cast<double>(config.d_max),
                                static_cast<double>(config.d_max));

    const auto r_f = static_cast<float>(r);
    const auto d_f = static_cast<float>(d);
    const auto mean_f = static_cast<float>(mean);
    const auto inv_std_f = static_cast<float>(1.0 / batch_std);
    for_channel(l, c, [&](std::size_t i) {
      const float u = (act_in[i] - mean_f) * inv_std_f;
      cache->normalized[i] = u;
      out[i] = gamma[c] * (u * r_f + d_f) + beta[c];
    });
    cache->batch_std[c] = static_cast<float>(batch_std);
    cache->r[c] = r_f;
    cache->d[c] = d_f;

    running.mean[c] += config.momentum * (mean_f - running.mean[c]);
    running.var[c] += config.momentum * (static_cast<float>(var) - running.var[c]);
  }
  return out;
}

Tensor batch_renorm_backward_error(const Tensor& err_in, const Tensor& gamma, const RenormCache& cache) {
  const Layout l = layout_of(err_in);
  if (cache.normalized.dims() != err_in.dims()) throw ShapeError("batch renorm error does not match cached input");
  Tensor err_out(err_in.dims());
  const double count = static_cast<double>(l.batch * l.plane);
  for (std::size_t c = 0; c < l.channels; ++c) {
    // du = err * gamma * r; dx = (du - mean(du) - u * mean(du * u)) / batch_std
    const double scale = static_cast<double>(gamma[c]) * cache.r[c];
    double sum_du = 0.0;
    double sum_du_u = 0.0;
    for_channel(l, c, [&](std::size_t i) {
      const double du = err_in[i] * scale;
      sum_du += du;
      sum_du_u += du * cache.normalized[i];
    });
    const double mean_du = sum_du / count;
    const double mean_du_u = sum_du_u / count;
    const double inv_std = 1.0 / cache.batch_std[c];
    for_channel(l, c, [&](std::size_t i) {
      const double du = err_in[i] * scale;
      err_out[i] = static_cast<float>((du - mean_du - cache.normalized[i] * mean_du_u) * inv_std);
    });
  }
  return err_out;
}

ParamGrads batch_renorm_backward_grad(const Tensor& err_in, const RenormCache& cache) {
  const Layout l = layout_of(err_in);
  if (cache.normalized.dims() != err_in.dims()) throw ShapeError("batch renorm error does not match cached input");
  ParamGrads grads{Tensor({l.channels}), Tensor({l.channels})};
  for (std::size_t c = 0; c < l.channels; ++c) {
    double dgamma = 0.0;
    double dbeta = 0.0;
    for_channel(l, c, [&](std::size_t i) {
      const double corrected = static_cast<double>(cache.normalized[i]) * cache.r[c] + cache.d[c];
      dgamma += err_in[i] * corrected;
      dbeta += err_in[i];
    });
    grads.weight[c] = static_cast<float>(dgamma);
    grads.bias[c] = static_cast<float>(dbeta);
  }
  return grads;
}

}  // namespace edgecl::nn
