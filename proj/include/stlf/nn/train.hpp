#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "stlf/data.hpp"
#include "stlf/error.hpp"
#include "stlf/nn/adam.hpp"
#include "stlf/nn/network.hpp"
#include "stlf/random.hpp"

namespace stlf::nn {

struct TrainConfig {
  std::size_t hidden_dim = 10;
  std::size_t num_layers = 1;
  double learning_rate = 0.005;
  std::size_t batch_size = 64;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  double clip_norm = 0.0;  // 0 disables global-norm clipping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const {
    if (hidden_dim < 1 || num_layers < 1 || batch_size < 1) {
      throw UsageError("hidden_dim, num_layers and batch_size must be >= 1");
    }
    if (!(learning_rate > 0)) throw UsageError("learning_rate must be > 0");
    if (clip_norm < 0) throw UsageError("clip_norm must be >= 0");
  }
};

inline NetDims dims_for(const WindowSet& w, const TrainConfig& cfg) {
  return {input_features(w.layout), cfg.hidden_dim, kHoursPerDay, cfg.num_layers};
}

template <class Cell>
struct TrainResult {
  NetParams<Cell> params;
  std::vector<double> loss_history;  // mean per-sample RMSE of each epoch
  std::size_t skipped_steps = 0;     // updates dropped for non-finite gradients
};

// Mean gradient and mean loss over the listed samples, summed in index order.
template <class Cell>
LossAndGradient<Cell> batch_loss_and_gradient(const NetParams<Cell>& p, const WindowSet& w,
                                              std::span<const std::size_t> indices) {
  LossAndGradient<Cell> acc{0.0, p.zeros_like()};
  for (std::size_t idx : indices) {
    auto sample = loss_and_gradient(p, w.inputs[idx], w.targets[idx]);
    acc.loss += sample.loss;
    acc.grad += sample.grad;
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  acc.loss *= inv;
  acc.grad *= inv;
  return acc;
}

template <class Cell>
double mean_loss(const NetParams<Cell>& p, const WindowSet& w) {
  if (w.empty()) throw DataError("no windows to evaluate");
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    total += loss_rmse(predict(p, w.inputs[i]), w.targets[i]);
  }
  return total / static_cast<double>(w.size());
}

template <class Cell>
void clip_global_norm(GradientSet<Cell>& g, double max_norm) {
  double sq = 0;
  for (const auto& t : std::as_const(g).tensors()) {
    for (double v : t.data) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) g *= max_norm / norm;
}

/// Mini-batch Adam on the RMSE loss. Samples are reshuffled every epoch with a
/// generator seeded from cfg.seed; the run is bitwise reproducible.
template <class Cell>
TrainResult<Cell> train(const WindowSet& windows, const TrainConfig& cfg, NetParams<Cell> init) {
  cfg.validate();
  if (windows.empty()) throw DataError("cannot train on an empty window set");
  TrainResult<Cell> out{std::move(init), {}, 0};
  if (cfg.epochs == 0) return out;
  AdamState adam(out.params.parameter_count(), cfg.learning_rate);
  adam.beta1 = cfg.beta1;
  adam.beta2 = cfg.beta2;
  adam.epsilon = cfg.adam_epsilon;
  adam.validate();

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - first);
      const std::span<const std::size_t> batch(order.data() + first, count);
      auto lg = batch_loss_and_gradient(out.params, windows, batch);
      epoch_loss += lg.loss * static_cast<double>(count);
      if (cfg.clip_norm > 0) clip_global_norm(lg.grad, cfg.clip_norm);
      if (adam_step(out.params, lg.grad, adam) == StepStatus::skipped_non_finite) {
        ++out.skipped_steps;
      }
    }
    out.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return out;
}

}  // namespace stlf::nn
