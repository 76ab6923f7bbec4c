// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "vemo/error.hpp"
#include "vemo/nn/activations.hpp"

namespace vemo::nn {

/// A batch of equal-length sequences stored time-major: column t*batch + b
/// holds step t of sequence b.
struct SequenceBatch {
  Matrix data;
  std::size_t steps = 0;
  std::size_t batch = 0;

  SequenceBatch() = default;
  SequenceBatch(std::size_t features, std::size_t steps_, std::size_t batch_)
      : data(Matrix::Zero(static_cast<Eigen::Index>(features), static_cast<Eigen::Index>(steps_ * batch_))),
        steps(steps_),
        batch(batch_) {}
  SequenceBatch(Matrix m, std::size_t steps_, std::size_t batch_) : data(std::move(m)), steps(steps_), batch(batch_) {
    if (static_cast<std::size_t>(data.cols()) != steps * batch) {
      throw InvalidArgument("sequence batch column count must equal steps * batch");
    }
  }

  std::size_t features() const noexcept { return static_cast<std::size_t>(data.rows()); }

  auto step(std::size_t t) { return data.middleCols(static_cast<Eigen::Index>(t * batch), static_cast<Eigen::Index>(batch)); }
  auto step(std::size_t t) const {
    return data.middleCols(static_cast<Eigen::Index>(t * batch), static_cast<Eigen::Index>(batch));
  }
};

/// Bias-free GRU layer:
///   z = g(W_z x + U_z h'),  r = g(W_r x + U_r h')
///   c = tanh(W_h x + U_h (r . h')),  h = z . h' + (1 - z) . c
/// with h' the previous state (zero before the first step) and g the gate
/// activation (logistic, or ELU in the encoder). z is a keep gate: an ELU
/// gate lies in (-1, inf), and only this form stays contractive for the
/// negative and small positive gate values common at initialization.
struct GruLayerParams {
  Matrix w_z, w_r, w_h;  // units x inputs
  Matrix u_z, u_r, u_h;  // units x units
  Activation gate = Activation::logistic;
  double alpha = 1.0;    // ELU alpha when gate == elu

  static GruLayerParams zeros(std::size_t inputs, std::size_t units, Activation gate = Activation::logistic) {
    const auto d = static_cast<Eigen::Index>(inputs);
    const auto f = static_cast<Eigen::Index>(units);
    GruLayerParams p;
    p.w_z = p.w_r = p.w_h = Matrix::Zero(f, d);
    p.u_z = p.u_r = p.u_h = Matrix::Zero(f, f);
    p.gate = gate;
    return p;
  }

  std::size_t inputs() const noexcept { return static_cast<std::size_t>(w_z.cols()); }
  std::size_t units() const noexcept { return static_cast<std::size_t>(w_z.rows()); }

  void check_shapes() const {
    const auto f = w_z.rows();
    const auto d = w_z.cols();
    auto ok = [&](const Matrix& m, Eigen::Index r, Eigen::Index c) { return m.rows() == r && m.cols() == c; };
    if (!ok(w_r, f, d) || !ok(w_h, f, d) || !ok(u_z, f, f) || !ok(u_r, f, f) || !ok(u_h, f, f)) {
      throw InvalidArgument("GRU layer matrices have inconsistent shapes");
    }
  }

  template <typename F>
  void for_each_tensor(F&& fn) {
    fn("w_z", w_z); fn("w_r", w_r); fn("w_h", w_h);
    fn("u_z", u_z); fn("u_r", u_r); fn("u_h", u_h);
  }
  template <typename F>
  void for_each_tensor(F&& fn) const {
    fn("w_z", w_z); fn("w_r", w_r); fn("w_h", w_h);
    fn("u_z", u_z); fn("u_r", u_r); fn("u_h", u_h);
  }
};

/// Cached activations of one forward pass; every matrix spans all steps
/// in the SequenceBatch layout.
struct GruTrace {
  std::size_t steps = 0;
  std::size_t batch = 0;
  Matrix x;       // inputs x steps*batch
  Matrix z, r;    // gates
  Matrix cand;    // candidate activation
  Matrix h;       // outputs

  auto block(const Matrix& m, std::size_t t) const {
    return m.middleCols(static_cast<Eigen::Index>(t * batch), static_cast<Eigen::Index>(batch));
  }

  /// Doubles cached per time step, per sequence.
  static std::size_t per_step_size(std::size_t inputs, std::size_t units) noexcept { return inputs + 4 * units; }

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(x.size() + z.size() + r.size() + cand.size() + h.size());
  }
};

namespace detail {

inline Matrix stack_rows(const Matrix& a, const Matrix& b) {
  Matrix m(a.rows() + b.rows(), a.cols());
  m << a, b;
  return m;
}

inline Matrix stack_rows(const Matrix& a, const Matrix& b, const Matrix& c) {
  Matrix m(a.rows() + b.rows() + c.rows(), a.cols());
  m << a, b, c;
  return m;
}

}  // namespace detail

inline GruTrace gru_forward(const GruLayerParams& layer, SequenceBatch inputs) {
  layer.check_shapes();
  if (inputs.features() != layer.inputs()) {
    throw InvalidArgument("GRU input dimension " + std::to_string(inputs.features()) + " does not match layer (" +
                          std::to_string(layer.inputs()) + ")");
  }
  const auto f = static_cast<Eigen::Index>(layer.units());
  const std::size_t steps = inputs.steps;
  const auto b = static_cast<Eigen::Index>(inputs.batch);
  const auto cols = inputs.data.cols();

  GruTrace tr;
  tr.steps = steps;
  tr.batch = inputs.batch;
  tr.x = std::move(inputs.data);
  tr.z.resize(f, cols);
  tr.r.resize(f, cols);
  tr.cand.resize(f, cols);
  tr.h.resize(f, cols);

  // input projections for every step at once
  const Matrix w_all = detail::stack_rows(layer.w_z, layer.w_r, layer.w_h);
  const Matrix u_zr = detail::stack_rows(layer.u_z, layer.u_r);
  Matrix proj = w_all * tr.x;

  Matrix prev = Matrix::Zero(f, b);
  Matrix gates(2 * f, b);
  Matrix reset_state(f, b);
  Matrix cand_pre(f, b);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto c0 = static_cast<Eigen::Index>(t) * b;
    if (t > 0) prev = tr.h.middleCols(c0 - b, b);

    gates.noalias() = u_zr * prev;
    gates += proj.block(0, c0, 2 * f, b);
    apply_inplace(layer.gate, gates, layer.alpha);
    tr.z.middleCols(c0, b) = gates.topRows(f);
    tr.r.middleCols(c0, b) = gates.bottomRows(f);

    reset_state = tr.r.middleCols(c0, b).cwiseProduct(prev);
    cand_pre.noalias() = layer.u_h * reset_state;
    cand_pre += proj.block(2 * f, c0, f, b);
    tr.cand.middleCols(c0, b) = cand_pre.array().tanh().matrix();

    const auto z = tr.z.middleCols(c0, b).array();
    tr.h.middleCols(c0, b) = (z * prev.array() + (1.0 - z) * tr.cand.middleCols(c0, b).array()).matrix();
  }
  return tr;
}

/// Output of the layer: the whole sequence, or only the final state.
inline Matrix gru_output(const GruTrace& trace, bool return_sequence) {
  if (return_sequence) return trace.h;
  return trace.block(trace.h, trace.steps - 1);
}

struct GruBackward {
  GruLayerParams grad;    // same shapes as the layer
  Matrix input_grad;      // inputs x steps*batch
};

/// Exact backpropagation through time. `output_grad` is either a full
/// sequence gradient (units x steps*batch) or the gradient of the final state
/// only (units x batch).
inline GruBackward gru_backward(const GruLayerParams& layer, const GruTrace& tr, const Matrix& output_grad) {
  layer.check_shapes();
  const auto f = static_cast<Eigen::Index>(layer.units());
  const auto b = static_cast<Eigen::Index>(tr.batch);
  const auto cols = static_cast<Eigen::Index>(tr.steps) * b;
  if (tr.h.rows() != f || tr.h.cols() != cols || tr.x.rows() != static_cast<Eigen::Index>(layer.inputs())) {
    throw InvalidArgument("GRU trace does not match layer shapes");
  }
  const bool full_sequence = output_grad.cols() == cols;
  if (output_grad.rows() != f || (!full_sequence && output_grad.cols() != b)) {
    throw InvalidArgument("GRU upstream gradient has the wrong shape");
  }

  const Matrix u_zr_t = detail::stack_rows(layer.u_z, layer.u_r).transpose();
  const Matrix u_h_t = layer.u_h.transpose();

  Matrix d_pre(3 * f, cols);     // pre-activation grads: z, r, candidate
  Matrix prev_all(f, cols);      // h_{t-1} per step
  Matrix reset_all(f, cols);     // r_t . h_{t-1} per step
  Matrix carry = Matrix::Zero(f, b);
  Matrix dh(f, b), d_prev(f, b), g(f, b), dz(f, b), dr(f, b), dc(f, b);

  for (std::size_t ti = tr.steps; ti-- > 0;) {
    const auto c0 = static_cast<Eigen::Index>(ti) * b;
    if (ti == 0) {
      prev_all.middleCols(c0, b).setZero();
    } else {
      prev_all.middleCols(c0, b) = tr.h.middleCols(c0 - b, b);
    }
    const auto prev = prev_all.middleCols(c0, b);
    const auto z = tr.z.middleCols(c0, b);
    const auto r = tr.r.middleCols(c0, b);
    const auto cand = tr.cand.middleCols(c0, b);
    reset_all.middleCols(c0, b) = r.cwiseProduct(prev);

    dh = carry;
    if (full_sequence) {
      dh += output_grad.middleCols(c0, b);
    } else if (ti + 1 == tr.steps) {
      dh += output_grad;
    }

    dc = dh.cwiseProduct((1.0 - z.array()).matrix());
    dz = dh.cwiseProduct(prev - cand);
    d_prev = dh.cwiseProduct(z);

    dc.array() *= 1.0 - cand.array().square();
    g.noalias() = u_h_t * dc;
    dr = g.cwiseProduct(prev);
    d_prev += g.cwiseProduct(r);

    backprop_activation(layer.gate, dz, z, layer.alpha);
    backprop_activation(layer.gate, dr, r, layer.alpha);

    d_pre.block(0, c0, f, b) = dz;
    d_pre.block(f, c0, f, b) = dr;
    d_pre.block(2 * f, c0, f, b) = dc;

    d_prev.noalias() += u_zr_t * d_pre.block(0, c0, 2 * f, b);
    carry = d_prev;
  }

  GruBackward out;
  const Matrix dw = d_pre * tr.x.transpose();
  out.grad.gate = layer.gate;
  out.grad.alpha = layer.alpha;
  out.grad.w_z = dw.topRows(f);
  out.grad.w_r = dw.middleRows(f, f);
  out.grad.w_h = dw.bottomRows(f);
  const Matrix du_zr = d_pre.topRows(2 * f) * prev_all.transpose();
  out.grad.u_z = du_zr.topRows(f);
  out.grad.u_r = du_zr.bottomRows(f);
  out.grad.u_h = d_pre.bottomRows(f) * reset_all.transpose();
  out.input_grad = detail::stack_rows(layer.w_z, layer.w_r, layer.w_h).transpose() * d_pre;
  return out;
}

}  // namespace vemo::nn
