// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "vemo/error.hpp"
#include "vemo/nn/vemo.hpp"

namespace vemo::train {

using nn::Matrix;
using nn::VemoParams;

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  std::size_t patience = 20;   // epochs without validation improvement; 0 disables
  double clip_norm = 5.0;      // global gradient norm; 0 disables
  std::size_t chunk_size = 32; // windows per gradient work item
  std::size_t threads = 1;

  void validate() const {
    if (batch_size < 1) throw InvalidArgument("batch size must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw InvalidArgument("learning rate must be finite and non-negative");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
      throw InvalidArgument("Adam betas must lie in (0, 1)");
    }
    if (!(epsilon > 0.0)) throw InvalidArgument("Adam epsilon must be positive");
    if (!(clip_norm >= 0.0)) throw InvalidArgument("clip norm must be non-negative");
    if (chunk_size < 1) throw InvalidArgument("chunk size must be at least 1");
  }
};

struct TrainState {
  VemoParams params;
  VemoParams first_moment;
  VemoParams second_moment;
  std::uint64_t step = 0;

  explicit TrainState(VemoParams p)
      : params(std::move(p)), first_moment(params.zeros_like()), second_moment(params.zeros_like()) {}
};

namespace detail {

template <typename F>
void for_each_tensor_pair(VemoParams& a, const VemoParams& b, F&& fn) {
  std::vector<const Matrix*> others;
  std::vector<std::string> names;
  b.for_each_tensor([&](const std::string& name, const Matrix& m) {
    others.push_back(&m);
    names.push_back(name);
  });
  std::size_t i = 0;
  a.for_each_tensor([&](const std::string& name, Matrix& m) {
    if (i >= others.size() || names[i] != name || others[i]->rows() != m.rows() || others[i]->cols() != m.cols()) {
      throw InvalidArgument("gradient tensor " + name + " is not congruent with the parameters");
    }
    fn(name, m, *others[i]);
    ++i;
  });
  if (i != others.size()) throw InvalidArgument("gradient has a different tensor count than the parameters");
}

}  // namespace detail

inline double global_norm(const VemoParams& g) {
  double sq = 0.0;
  g.for_each_tensor([&](const std::string&, const Matrix& m) { sq += m.squaredNorm(); });
  return std::sqrt(sq);
}

/// Throws NumericError naming the first tensor holding a NaN or infinity.
inline void check_finite(const VemoParams& g, const std::string& what) {
  g.for_each_tensor([&](const std::string& name, const Matrix& m) {
    if (!m.allFinite()) throw NumericError("non-finite " + what + " in tensor " + name);
  });
}

/// Bias-corrected Adam update.
inline void adam_step(TrainState& state, const VemoParams& grad, const TrainConfig& config) {
  check_finite(grad, "gradient");
  // shape check before touching any state
  detail::for_each_tensor_pair(state.first_moment, grad, [](const std::string&, Matrix&, const Matrix&) {});

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);

  detail::for_each_tensor_pair(state.first_moment, grad, [&](const std::string&, Matrix& m, const Matrix& g) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
  });
  detail::for_each_tensor_pair(state.second_moment, grad, [&](const std::string&, Matrix& v, const Matrix& g) {
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseAbs2();
  });

  std::vector<const Matrix*> m_list, v_list;
  state.first_moment.for_each_tensor([&](const std::string&, const Matrix& m) { m_list.push_back(&m); });
  state.second_moment.for_each_tensor([&](const std::string&, const Matrix& v) { v_list.push_back(&v); });
  std::size_t i = 0;
  state.params.for_each_tensor([&](const std::string&, Matrix& p) {
    const auto m_hat = m_list[i]->array() / c1;
    const auto v_hat = v_list[i]->array() / c2;
    p.array() -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    ++i;
  });
}

}  // namespace vemo::train
