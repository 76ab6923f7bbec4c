// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "vemo/error.hpp"

namespace vemo::nn {

using Matrix = Eigen::MatrixXd;

enum class Activation : std::uint64_t { linear = 0, logistic = 1, tanh = 2, elu = 3 };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::logistic: return "logistic";
    case Activation::tanh: return "tanh";
    case Activation::elu: return "elu";
  }
  return "?";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "linear") return Activation::linear;
  if (s == "logistic") return Activation::logistic;
  if (s == "tanh") return Activation::tanh;
  if (s == "elu") return Activation::elu;
  throw InvalidArgument("unknown activation '" + std::string(s) + "'");
}

/// x for x > 0, alpha * (e^x - 1) otherwise.
inline double elu(double x, double alpha = 1.0) { return x > 0.0 ? x : alpha * std::expm1(x); }

inline double elu_derivative(double x, double alpha = 1.0) { return x > 0.0 ? 1.0 : alpha * std::exp(x); }

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double apply(Activation a, double x, double alpha = 1.0) {
  switch (a) {
    case Activation::linear: return x;
    case Activation::logistic: return logistic(x);
    case Activation::tanh: return std::tanh(x);
    case Activation::elu: return elu(x, alpha);
  }
  return x;
}

/// Derivative expressed through the activation output y = f(x). Exact for
/// all four functions (for ELU, y > 0 iff x > 0 and f'(x) = y + alpha below).
inline double derivative_from_output(Activation a, double y, double alpha = 1.0) {
  switch (a) {
    case Activation::linear: return 1.0;
    case Activation::logistic: return y * (1.0 - y);
    case Activation::tanh: return 1.0 - y * y;
    case Activation::elu: return y > 0.0 ? 1.0 : y + alpha;
  }
  return 1.0;
}

template <typename Derived>
void apply_inplace(Activation a, Eigen::MatrixBase<Derived>& m, double alpha = 1.0) {
  switch (a) {
    case Activation::linear: return;
    case Activation::tanh: m.derived() = m.array().tanh().matrix(); return;
    default: m.derived() = m.unaryExpr([a, alpha](double x) { return apply(a, x, alpha); }); return;
  }
}

/// grad *= f'(x) where `out` holds f(x).
template <typename G, typename Y>
void backprop_activation(Activation a, Eigen::MatrixBase<G>& grad, const Eigen::MatrixBase<Y>& out,
                         double alpha = 1.0) {
  switch (a) {
    case Activation::linear: return;
    case Activation::logistic:
      grad.derived().array() *= out.array() * (1.0 - out.array());
      return;
    case Activation::tanh:
      grad.derived().array() *= 1.0 - out.array().square();
      return;
    case Activation::elu:
      grad.derived().array() *= (out.array() > 0.0).select(1.0, out.array() + alpha);
      return;
  }
}

}  // namespace vemo::nn
