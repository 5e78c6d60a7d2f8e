#pragma once

// Swarm search over the input-side and output-head weights of a recurrent
// network. A candidate is scored by briefly training from it and measuring
// RMSE on a held-out slice.

#include <algorithm>
#include <cmath>
#include <utility>
#include <span>
#include <vector>

#include "stlf/data.hpp"
#include "stlf/nn/network.hpp"
#include "stlf/nn/train.hpp"
#include "stlf/pso.hpp"

namespace stlf::pso {

inline const std::vector<nn::TensorRole>& default_target_roles() {
  static const std::vector<nn::TensorRole> roles = {nn::TensorRole::input, nn::TensorRole::head};
  return roles;
}

inline bool controls(std::span<const nn::TensorRole> mask, nn::TensorRole role) {
  return std::find(mask.begin(), mask.end(), role) != mask.end();
}

template <class Cell>
std::size_t controlled_dimension(const nn::NetParams<Cell>& p,
                                 std::span<const nn::TensorRole> mask) {
  std::size_t n = 0;
  for (const auto& t : p.tensors()) {
    if (controls(mask, t.role)) n += t.data.size();
  }
  return n;
}

template <class Cell>
std::vector<double> gather(const nn::NetParams<Cell>& p, std::span<const nn::TensorRole> mask) {
  std::vector<double> out;
  for (const auto& t : p.tensors()) {
    if (controls(mask, t.role)) out.insert(out.end(), t.data.begin(), t.data.end());
  }
  return out;
}

template <class Cell>
void scatter(std::span<const double> position, nn::NetParams<Cell>& p,
             std::span<const nn::TensorRole> mask) {
  if (position.size() != controlled_dimension(p, mask)) {
    throw ShapeError("swarm position length does not match the controlled tensors");
  }
  std::size_t offset = 0;
  for (auto& t : p.tensors()) {
    if (!controls(mask, t.role)) continue;
    std::copy_n(position.begin() + static_cast<std::ptrdiff_t>(offset), t.data.size(),
                t.data.begin());
    offset += t.data.size();
  }
}

template <class Cell>
struct FitnessSpec {
  const WindowSet* probe_windows = nullptr;       // trained on for probe_epochs
  const WindowSet* validation_windows = nullptr;  // scored
  std::size_t probe_epochs = 5;
  nn::TrainConfig base;                 // probe training settings (epochs is overridden)
  std::vector<nn::TensorRole> target_mask = default_target_roles();
  nn::NetParams<Cell> base_params;      // supplies every tensor the swarm does not control
};

/// Held-out split: the last `fraction` of the windows (at least one) validate;
/// the rest train. With a single window both roles use it.
inline std::pair<WindowSet, WindowSet> split_validation(const WindowSet& w, double fraction) {
  if (w.empty()) throw DataError("no windows to split");
  if (w.size() < 2) return {w, w};
  auto n_val = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(w.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, w.size() - 1);
  return {w.slice(0, w.size() - n_val), w.slice(w.size() - n_val, n_val)};
}

template <class Cell>
double weight_fitness(const FitnessSpec<Cell>& spec, std::span<const double> position) {
  auto params = spec.base_params;
  scatter(position, params, spec.target_mask);
  if (spec.probe_epochs > 0) {
    auto cfg = spec.base;
    cfg.epochs = spec.probe_epochs;
    params = nn::train(*spec.probe_windows, cfg, std::move(params)).params;
  }
  return nn::mean_loss(params, *spec.validation_windows);
}

template <class Cell>
struct WeightSearchResult {
  Result swarm;
  nn::NetParams<Cell> params;  // base_params with the best position scattered in
};

template <class Cell>
WeightSearchResult<Cell> optimize_weights(const FitnessSpec<Cell>& spec, const SwarmConfig& cfg) {
  const std::size_t dim = controlled_dimension(spec.base_params, spec.target_mask);
  auto result = optimize(
      [&spec](std::span<const double> x) { return weight_fitness(spec, x); }, dim, cfg);
  auto params = spec.base_params;
  scatter(result.best_position, params, spec.target_mask);
  return {std::move(result), std::move(params)};
}

}  // namespace stlf::pso
