#pragma once

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <string>

namespace stlf::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Which part of a network a tensor belongs to. The swarm initializer only
// touches `input` and `head` tensors.
enum class TensorRole { input, recurrent, bias, head };

template <class T>
struct BasicTensorView {
  std::string name;
  TensorRole role;
  std::span<T> data;
};

using TensorView = BasicTensorView<double>;
using ConstTensorView = BasicTensorView<const double>;

template <class Derived>
std::span<double> as_span(Eigen::PlainObjectBase<Derived>& t) {
  return {t.data(), static_cast<std::size_t>(t.size())};
}

template <class Derived>
std::span<const double> as_span(const Eigen::PlainObjectBase<Derived>& t) {
  return {t.data(), static_cast<std::size_t>(t.size())};
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vector sigmoid(const Vector& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

inline Vector tanh(const Vector& z) {
  return z.unaryExpr([](double v) { return std::tanh(v); });
}

}  // namespace stlf::nn
