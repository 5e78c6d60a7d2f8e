#pragma once

// Recurrent cells. Each cell type provides
//   Weights   - its parameter tensors, visitable in a fixed declared order
//   State     - recurrent state; always has a hidden vector `h`
//   Cache     - what backward needs from a forward step
//   forward   - one time step
//   backward  - reverse step: accumulates weight gradients, returns the
//               gradient with respect to the previous state and the input

#include <string_view>
#include <utility>

#include "stlf/error.hpp"
#include "stlf/nn/tensor.hpp"

namespace stlf::nn {

enum class CellKind : unsigned { lstm = 0, rnn = 1, gru = 2 };

namespace detail {

inline void check_input(const Matrix& w_x, const Vector& x, const Vector& h) {
  if (w_x.cols() != x.size()) {
    throw ShapeError("input has " + std::to_string(x.size()) + " features, cell expects " +
                     std::to_string(w_x.cols()));
  }
  if (w_x.rows() != h.size()) {
    throw ShapeError("state has " + std::to_string(h.size()) + " units, cell expects " +
                     std::to_string(w_x.rows()));
  }
}

inline Vector one_minus_square(const Vector& v) { return (1.0 - v.array().square()).matrix(); }

inline Vector sigmoid_slope(const Vector& s) { return (s.array() * (1.0 - s.array())).matrix(); }

}  // namespace detail

struct LstmCell {
  static constexpr CellKind kind = CellKind::lstm;
  static constexpr std::string_view name = "lstm";

  struct Weights {
    Matrix w_xf, w_xi, w_xc, w_xo;  // hidden x input
    Matrix w_hf, w_hi, w_hc, w_ho;  // hidden x hidden
    Vector bias_f, bias_i, bias_c, bias_o;

    static Weights zeros(Eigen::Index input, Eigen::Index hidden) {
      Weights w;
      for (Matrix* m : {&w.w_xf, &w.w_xi, &w.w_xc, &w.w_xo}) m->setZero(hidden, input);
      for (Matrix* m : {&w.w_hf, &w.w_hi, &w.w_hc, &w.w_ho}) m->setZero(hidden, hidden);
      for (Vector* b : {&w.bias_f, &w.bias_i, &w.bias_c, &w.bias_o}) b->setZero(hidden);
      return w;
    }

    template <class Self, class F>
    static void visit(Self& w, F&& f) {
      f("w_xf", w.w_xf, TensorRole::input);
      f("w_xi", w.w_xi, TensorRole::input);
      f("w_xc", w.w_xc, TensorRole::input);
      f("w_xo", w.w_xo, TensorRole::input);
      f("w_hf", w.w_hf, TensorRole::recurrent);
      f("w_hi", w.w_hi, TensorRole::recurrent);
      f("w_hc", w.w_hc, TensorRole::recurrent);
      f("w_ho", w.w_ho, TensorRole::recurrent);
      f("bias_f", w.bias_f, TensorRole::bias);
      f("bias_i", w.bias_i, TensorRole::bias);
      f("bias_c", w.bias_c, TensorRole::bias);
      f("bias_o", w.bias_o, TensorRole::bias);
    }
  };

  struct State {
    Vector h;
    Vector c;
    static State zeros(Eigen::Index hidden) {
      return {Vector::Zero(hidden), Vector::Zero(hidden)};
    }
  };

  struct Cache {
    Vector x, h_prev, c_prev;
    Vector f, i, o, c_tilde;  // gate activations and candidate
    Vector c, tanh_c;
  };

  static State forward(const Weights& w, const Vector& x, const State& prev, Cache& cache) {
    detail::check_input(w.w_xf, x, prev.h);
    cache.x = x;
    cache.h_prev = prev.h;
    cache.c_prev = prev.c;
    cache.f = sigmoid(w.w_xf * x + w.w_hf * prev.h + w.bias_f);
    cache.i = sigmoid(w.w_xi * x + w.w_hi * prev.h + w.bias_i);
    cache.c_tilde = nn::tanh(w.w_xc * x + w.w_hc * prev.h + w.bias_c);
    cache.o = sigmoid(w.w_xo * x + w.w_ho * prev.h + w.bias_o);
    cache.c = cache.f.cwiseProduct(prev.c) + cache.i.cwiseProduct(cache.c_tilde);
    cache.tanh_c = nn::tanh(cache.c);
    return {cache.o.cwiseProduct(cache.tanh_c), cache.c};
  }

  static State backward(const Weights& w, const Cache& k, const State& d_next, Weights& g,
                        Vector& dx) {
    const Vector d_o = d_next.h.cwiseProduct(k.tanh_c);
    const Vector dc = d_next.c + d_next.h.cwiseProduct(k.o).cwiseProduct(
                                     detail::one_minus_square(k.tanh_c));
    const Vector dz_f = dc.cwiseProduct(k.c_prev).cwiseProduct(detail::sigmoid_slope(k.f));
    const Vector dz_i = dc.cwiseProduct(k.c_tilde).cwiseProduct(detail::sigmoid_slope(k.i));
    const Vector dz_c = dc.cwiseProduct(k.i).cwiseProduct(detail::one_minus_square(k.c_tilde));
    const Vector dz_o = d_o.cwiseProduct(detail::sigmoid_slope(k.o));

    g.w_xf.noalias() += dz_f * k.x.transpose();
    g.w_xi.noalias() += dz_i * k.x.transpose();
    g.w_xc.noalias() += dz_c * k.x.transpose();
    g.w_xo.noalias() += dz_o * k.x.transpose();
    g.w_hf.noalias() += dz_f * k.h_prev.transpose();
    g.w_hi.noalias() += dz_i * k.h_prev.transpose();
    g.w_hc.noalias() += dz_c * k.h_prev.transpose();
    g.w_ho.noalias() += dz_o * k.h_prev.transpose();
    g.bias_f += dz_f;
    g.bias_i += dz_i;
    g.bias_c += dz_c;
    g.bias_o += dz_o;

    dx = w.w_xf.transpose() * dz_f + w.w_xi.transpose() * dz_i + w.w_xc.transpose() * dz_c +
         w.w_xo.transpose() * dz_o;
    State d_prev;
    d_prev.h = w.w_hf.transpose() * dz_f + w.w_hi.transpose() * dz_i +
               w.w_hc.transpose() * dz_c + w.w_ho.transpose() * dz_o;
    d_prev.c = dc.cwiseProduct(k.f);
    return d_prev;
  }
};

// Elman cell: h = tanh(W_x x + W_h h_prev + b).
struct RnnCell {
  static constexpr CellKind kind = CellKind::rnn;
  static constexpr std::string_view name = "rnn";

  struct Weights {
    Matrix w_x, w_h;
    Vector bias;

    static Weights zeros(Eigen::Index input, Eigen::Index hidden) {
      return {Matrix::Zero(hidden, input), Matrix::Zero(hidden, hidden), Vector::Zero(hidden)};
    }

    template <class Self, class F>
    static void visit(Self& w, F&& f) {
      f("w_x", w.w_x, TensorRole::input);
      f("w_h", w.w_h, TensorRole::recurrent);
      f("bias", w.bias, TensorRole::bias);
    }
  };

  struct State {
    Vector h;
    static State zeros(Eigen::Index hidden) { return {Vector::Zero(hidden)}; }
  };

  struct Cache {
    Vector x, h_prev, h;
  };

  static State forward(const Weights& w, const Vector& x, const State& prev, Cache& cache) {
    detail::check_input(w.w_x, x, prev.h);
    cache.x = x;
    cache.h_prev = prev.h;
    cache.h = nn::tanh(w.w_x * x + w.w_h * prev.h + w.bias);
    return {cache.h};
  }

  static State backward(const Weights& w, const Cache& k, const State& d_next, Weights& g,
                        Vector& dx) {
    const Vector dz = d_next.h.cwiseProduct(detail::one_minus_square(k.h));
    g.w_x.noalias() += dz * k.x.transpose();
    g.w_h.noalias() += dz * k.h_prev.transpose();
    g.bias += dz;
    dx = w.w_x.transpose() * dz;
    return {w.w_h.transpose() * dz};
  }
};

// Gated recurrent unit:
//   z = sigmoid(W_xz x + W_hz h_prev + b_z)         update gate
//   r = sigmoid(W_xr x + W_hr h_prev + b_r)         reset gate
//   n = tanh(W_xn x + W_hn (r * h_prev) + b_n)      candidate
//   h = (1 - z) * h_prev + z * n
// so a closed update gate (z = 0) carries the previous state through.
struct GruCell {
  static constexpr CellKind kind = CellKind::gru;
  static constexpr std::string_view name = "gru";

  struct Weights {
    Matrix w_xz, w_xr, w_xn;
    Matrix w_hz, w_hr, w_hn;
    Vector bias_z, bias_r, bias_n;

    static Weights zeros(Eigen::Index input, Eigen::Index hidden) {
      Weights w;
      for (Matrix* m : {&w.w_xz, &w.w_xr, &w.w_xn}) m->setZero(hidden, input);
      for (Matrix* m : {&w.w_hz, &w.w_hr, &w.w_hn}) m->setZero(hidden, hidden);
      for (Vector* b : {&w.bias_z, &w.bias_r, &w.bias_n}) b->setZero(hidden);
      return w;
    }

    template <class Self, class F>
    static void visit(Self& w, F&& f) {
      f("w_xz", w.w_xz, TensorRole::input);
      f("w_xr", w.w_xr, TensorRole::input);
      f("w_xn", w.w_xn, TensorRole::input);
      f("w_hz", w.w_hz, TensorRole::recurrent);
      f("w_hr", w.w_hr, TensorRole::recurrent);
      f("w_hn", w.w_hn, TensorRole::recurrent);
      f("bias_z", w.bias_z, TensorRole::bias);
      f("bias_r", w.bias_r, TensorRole::bias);
      f("bias_n", w.bias_n, TensorRole::bias);
    }
  };

  struct State {
    Vector h;
    static State zeros(Eigen::Index hidden) { return {Vector::Zero(hidden)}; }
  };

  struct Cache {
    Vector x, h_prev, z, r, n, rh;
  };

  static State forward(const Weights& w, const Vector& x, const State& prev, Cache& cache) {
    detail::check_input(w.w_xz, x, prev.h);
    cache.x = x;
    cache.h_prev = prev.h;
    cache.z = sigmoid(w.w_xz * x + w.w_hz * prev.h + w.bias_z);
    cache.r = sigmoid(w.w_xr * x + w.w_hr * prev.h + w.bias_r);
    cache.rh = cache.r.cwiseProduct(prev.h);
    cache.n = nn::tanh(w.w_xn * x + w.w_hn * cache.rh + w.bias_n);
    Vector h = prev.h + cache.z.cwiseProduct(cache.n - prev.h);
    return {std::move(h)};
  }

  static State backward(const Weights& w, const Cache& k, const State& d_next, Weights& g,
                        Vector& dx) {
    const Vector& dh = d_next.h;
    const Vector dz_n = dh.cwiseProduct(k.z).cwiseProduct(detail::one_minus_square(k.n));
    const Vector dz_z = dh.cwiseProduct(k.n - k.h_prev).cwiseProduct(detail::sigmoid_slope(k.z));
    const Vector d_rh = w.w_hn.transpose() * dz_n;
    const Vector dz_r = d_rh.cwiseProduct(k.h_prev).cwiseProduct(detail::sigmoid_slope(k.r));

    g.w_xz.noalias() += dz_z * k.x.transpose();
    g.w_xr.noalias() += dz_r * k.x.transpose();
    g.w_xn.noalias() += dz_n * k.x.transpose();
    g.w_hz.noalias() += dz_z * k.h_prev.transpose();
    g.w_hr.noalias() += dz_r * k.h_prev.transpose();
    g.w_hn.noalias() += dz_n * k.rh.transpose();
    g.bias_z += dz_z;
    g.bias_r += dz_r;
    g.bias_n += dz_n;

    dx = w.w_xz.transpose() * dz_z + w.w_xr.transpose() * dz_r + w.w_xn.transpose() * dz_n;
    State d_prev;
    d_prev.h = dh.cwiseProduct((1.0 - k.z.array()).matrix()) + d_rh.cwiseProduct(k.r) +
               w.w_hz.transpose() * dz_z + w.w_hr.transpose() * dz_r;
    return d_prev;
  }
};

using LstmState = LstmCell::State;
using LstmGateCache = LstmCell::Cache;

inline std::pair<LstmState, LstmGateCache> lstm_cell_forward(const Vector& x,
                                                             const LstmState& prev,
                                                             const LstmCell::Weights& w) {
  LstmGateCache cache;
  auto next = LstmCell::forward(w, x, prev, cache);
  return {std::move(next), std::move(cache)};
}

inline Vector rnn_cell_forward(const Vector& x, const Vector& prev_h,
                               const RnnCell::Weights& w) {
  RnnCell::Cache cache;
  return RnnCell::forward(w, x, {prev_h}, cache).h;
}

inline Vector gru_cell_forward(const Vector& x, const Vector& prev_h,
                               const GruCell::Weights& w) {
  GruCell::Cache cache;
  return GruCell::forward(w, x, {prev_h}, cache).h;
}

}  // namespace stlf::nn
