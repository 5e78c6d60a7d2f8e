#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "stlf/error.hpp"
#include "stlf/nn/network.hpp"

namespace stlf::nn {

struct AdamState {
  double alpha = 0.005;  // step size
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t t = 0;
  std::vector<double> m;  // first moment, one entry per parameter
  std::vector<double> v;  // second raw moment

  AdamState() = default;
  AdamState(std::size_t n, double step_size) : alpha(step_size), m(n, 0.0), v(n, 0.0) {}

  void validate() const {
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
      throw UsageError("Adam decay rates must lie in [0, 1)");
    }
    if (!(alpha > 0)) throw UsageError("Adam step size must be > 0");
  }
};

enum class StepStatus { applied, skipped_non_finite };

/// One Adam update of `theta` in place:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   theta <- theta - alpha * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
/// A gradient with any non-finite entry leaves theta and the state untouched.
inline StepStatus adam_step(std::span<double> theta, std::span<const double> grad,
                            AdamState& s) {
  if (theta.size() != grad.size()) throw ShapeError("Adam: gradient/parameter size mismatch");
  if (s.m.empty() && s.v.empty()) {
    s.m.assign(theta.size(), 0.0);
    s.v.assign(theta.size(), 0.0);
  }
  if (s.m.size() != theta.size() || s.v.size() != theta.size()) {
    throw ShapeError("Adam: state size does not match parameters");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) return StepStatus::skipped_non_finite;
  }
  ++s.t;
  const double t = static_cast<double>(s.t);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grad[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    theta[i] -= s.alpha * m_hat / (std::sqrt(v_hat) + s.epsilon);
  }
  return StepStatus::applied;
}

template <class Cell>
StepStatus adam_step(NetParams<Cell>& params, const GradientSet<Cell>& grads, AdamState& s) {
  if (!(params.dims == grads.dims)) throw ShapeError("Adam: gradient set shape differs from params");
  std::vector<double> theta = params.flatten();
  const std::vector<double> g = grads.flatten();
  const auto status = adam_step(std::span<double>(theta), std::span<const double>(g), s);
  if (status == StepStatus::applied) {
    std::size_t offset = 0;
    for (auto& t : params.tensors()) {
      std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(offset), t.data.size(),
                  t.data.begin());
      offset += t.data.size();
    }
  }
  return status;
}

}  // namespace stlf::nn
