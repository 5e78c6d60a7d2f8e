#pragma once

// Stacked recurrent network with a linear head on the last hidden state,
// reverse-mode gradients through time, and the RMSE training loss.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <type_traits>
#include <string>
#include <vector>

#include "stlf/error.hpp"
#include "stlf/nn/cells.hpp"
#include "stlf/nn/tensor.hpp"
#include "stlf/random.hpp"

namespace stlf::nn {

struct NetDims {
  std::size_t input = 1;
  std::size_t hidden = 1;
  std::size_t output = 1;
  std::size_t layers = 1;

  friend bool operator==(const NetDims&, const NetDims&) = default;
};

template <class Cell>
struct NetParams {
  using CellType = Cell;

  NetDims dims;
  std::vector<typename Cell::Weights> layers;
  Matrix w_out;     // output x hidden
  Vector bias_out;  // output

  static NetParams zeros(const NetDims& d) {
    if (d.input < 1 || d.hidden < 1 || d.output < 1 || d.layers < 1) {
      throw UsageError("network dimensions must all be >= 1");
    }
    NetParams p;
    p.dims = d;
    const auto in = static_cast<Eigen::Index>(d.input);
    const auto hid = static_cast<Eigen::Index>(d.hidden);
    for (std::size_t l = 0; l < d.layers; ++l) {
      p.layers.push_back(Cell::Weights::zeros(l == 0 ? in : hid, hid));
    }
    p.w_out.setZero(static_cast<Eigen::Index>(d.output), hid);
    p.bias_out.setZero(static_cast<Eigen::Index>(d.output));
    return p;
  }

  NetParams zeros_like() const { return zeros(dims); }

  // Visits every tensor in declared order: each layer's cell tensors, then
  // w_out, then bias_out.
  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      const std::string prefix = self.layers.size() > 1 ? "l" + std::to_string(l) + "." : "";
      Cell::Weights::visit(self.layers[l], [&](std::string_view name, auto& t, TensorRole role) {
        f(prefix + std::string(name), t, role);
      });
    }
    f(std::string("w_out"), self.w_out, TensorRole::head);
    f(std::string("bias_out"), self.bias_out, TensorRole::head);
  }

  std::vector<TensorView> tensors() {
    std::vector<TensorView> out;
    visit(*this, [&](std::string name, auto& t, TensorRole role) {
      out.push_back({std::move(name), role, as_span(t)});
    });
    return out;
  }

  std::vector<ConstTensorView> tensors() const {
    std::vector<ConstTensorView> out;
    visit(*this, [&](std::string name, const auto& t, TensorRole role) {
      out.push_back({std::move(name), role, as_span(t)});
    });
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors()) n += t.data.size();
    return n;
  }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& t : tensors()) out.insert(out.end(), t.data.begin(), t.data.end());
    return out;
  }

  bool all_finite() const {
    for (const auto& t : tensors()) {
      for (double v : t.data) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }

  NetParams& operator+=(const NetParams& other) {
    auto mine = tensors();
    const auto theirs = other.tensors();
    for (std::size_t i = 0; i < mine.size(); ++i) {
      for (std::size_t j = 0; j < mine[i].data.size(); ++j) mine[i].data[j] += theirs[i].data[j];
    }
    return *this;
  }

  NetParams& operator*=(double s) {
    for (auto& t : tensors()) {
      for (double& v : t.data) v *= s;
    }
    return *this;
  }
};

template <class Cell>
using GradientSet = NetParams<Cell>;

using LstmParams = NetParams<LstmCell>;
using RnnParams = NetParams<RnnCell>;
using GruParams = NetParams<GruCell>;

template <class Cell>
bool bitwise_equal(const NetParams<Cell>& a, const NetParams<Cell>& b) {
  if (!(a.dims == b.dims)) return false;
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].data.size() != tb[i].data.size()) return false;
    if (std::memcmp(ta[i].data.data(), tb[i].data.data(), ta[i].data.size() * sizeof(double)) !=
        0) {
      return false;
    }
  }
  return true;
}

// Uniform in +-1/sqrt(fan_in), fan_in being the column count of a matrix and
// the hidden width for bias vectors.
template <class Cell>
NetParams<Cell> init_params(const NetDims& dims, std::uint64_t seed) {
  auto p = NetParams<Cell>::zeros(dims);
  Rng rng(seed);
  NetParams<Cell>::visit(p, [&](const std::string&, auto& t, TensorRole) {
    using T = std::remove_cvref_t<decltype(t)>;
    const double fan_in = T::ColsAtCompileTime == 1 ? static_cast<double>(dims.hidden)
                                                    : static_cast<double>(t.cols());
    const double bound = 1.0 / std::sqrt(fan_in);
    for (double& v : as_span(t)) v = rng.uniform(-bound, bound);
  });
  return p;
}

template <class Cell>
struct ForwardPass {
  Vector prediction;
  Vector last_hidden;
  std::vector<std::vector<typename Cell::Cache>> caches;  // [layer][step]
};

template <class Cell>
ForwardPass<Cell> sequence_forward(const NetParams<Cell>& p, const Matrix& seq) {
  if (seq.cols() < 1) throw ShapeError("sequence must have at least one step");
  if (static_cast<std::size_t>(seq.rows()) != p.dims.input) {
    throw ShapeError("sequence has " + std::to_string(seq.rows()) + " features, network expects " +
                     std::to_string(p.dims.input));
  }
  const auto steps = static_cast<std::size_t>(seq.cols());
  const auto hidden = static_cast<Eigen::Index>(p.dims.hidden);
  ForwardPass<Cell> out;
  out.caches.resize(p.layers.size());
  std::vector<Vector> layer_input(steps);
  for (std::size_t t = 0; t < steps; ++t) layer_input[t] = seq.col(static_cast<Eigen::Index>(t));
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto state = Cell::State::zeros(hidden);
    out.caches[l].resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      state = Cell::forward(p.layers[l], layer_input[t], state, out.caches[l][t]);
      layer_input[t] = state.h;
    }
  }
  out.last_hidden = layer_input.back();
  out.prediction = p.w_out * out.last_hidden + p.bias_out;
  return out;
}

template <class Cell>
Vector predict(const NetParams<Cell>& p, const Matrix& seq) {
  return sequence_forward(p, seq).prediction;
}

inline double loss_rmse(const Vector& pred, const Vector& target) {
  if (pred.size() != target.size()) throw ShapeError("prediction and target lengths differ");
  if (pred.size() == 0) throw ShapeError("empty prediction");
  return std::sqrt((pred - target).squaredNorm() / static_cast<double>(pred.size()));
}

// d rmse / d pred. At zero residual the square root is not differentiable; the
// gradient is taken as zero there.
inline Vector loss_rmse_gradient(const Vector& pred, const Vector& target) {
  const double rmse = loss_rmse(pred, target);
  if (rmse == 0.0) return Vector::Zero(pred.size());
  return (pred - target) / (static_cast<double>(pred.size()) * rmse);
}

/// Gradient of the RMSE loss with respect to every parameter, by reverse
/// accumulation through the head, all layers and all time steps.
template <class Cell>
GradientSet<Cell> backward(const NetParams<Cell>& p, const Matrix& seq, const Vector& target,
                           const ForwardPass<Cell>& fwd) {
  const auto steps = static_cast<std::size_t>(seq.cols());
  if (fwd.caches.size() != p.layers.size()) throw ShapeError("cache/params layer count mismatch");
  for (const auto& layer : fwd.caches) {
    if (layer.size() != steps) throw ShapeError("cache/sequence step count mismatch");
  }
  if (static_cast<std::size_t>(target.size()) != p.dims.output) {
    throw ShapeError("target length does not match network output");
  }
  const auto hidden = static_cast<Eigen::Index>(p.dims.hidden);
  auto g = p.zeros_like();

  const Vector d_pred = loss_rmse_gradient(fwd.prediction, target);
  g.w_out.noalias() += d_pred * fwd.last_hidden.transpose();
  g.bias_out += d_pred;

  // Gradient arriving at each step's output of the current layer from above.
  std::vector<Vector> d_out(steps, Vector::Zero(hidden));
  d_out.back() = p.w_out.transpose() * d_pred;
  Vector dx;
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    auto d_state = Cell::State::zeros(hidden);
    std::vector<Vector> d_below(steps);
    for (std::size_t t = steps; t-- > 0;) {
      d_state.h += d_out[t];
      d_state = Cell::backward(p.layers[l], fwd.caches[l][t], d_state, g.layers[l], dx);
      d_below[t] = dx;
    }
    d_out = std::move(d_below);
  }
  return g;
}

template <class Cell>
struct LossAndGradient {
  double loss = 0;
  GradientSet<Cell> grad;
};

template <class Cell>
LossAndGradient<Cell> loss_and_gradient(const NetParams<Cell>& p, const Matrix& seq,
                                        const Vector& target) {
  const auto fwd = sequence_forward(p, seq);
  return {loss_rmse(fwd.prediction, target), backward(p, seq, target, fwd)};
}

}  // namespace stlf::nn
