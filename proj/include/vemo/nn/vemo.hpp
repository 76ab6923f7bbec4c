// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vemo/channels.hpp"
#include "vemo/error.hpp"
#include "vemo/nn/activations.hpp"
#include "vemo/nn/gru.hpp"

namespace vemo::nn {

/// y = f(W x), no bias.
struct DenseLayerParams {
  Matrix w;  // outputs x inputs
  Activation activation = Activation::linear;
  double alpha = 1.0;

  std::size_t inputs() const noexcept { return static_cast<std::size_t>(w.cols()); }
  std::size_t outputs() const noexcept { return static_cast<std::size_t>(w.rows()); }
};

using Branch = std::vector<DenseLayerParams>;

inline constexpr std::size_t kNumBranches = kNumStates;

/// Layer widths and activations. The encoder is a stack of GRU layers; all
/// but the last return the full sequence, the last returns its final state.
/// Each branch is a dense stack ending in a single linear output.
/// Encoder gates default to the logistic sigmoid: ELU gates are unbounded
/// above, and a gate value past 1 amplifies the state at every step of the
/// window, which diverged within one epoch on the synthetic telemetry.
struct Architecture {
  std::size_t inputs = kNumChannels;
  std::vector<std::size_t> encoder_units = {32, 32};
  std::vector<std::size_t> branch_hidden = {16};
  Activation encoder_gate = Activation::logistic;
  Activation branch_activation = Activation::elu;
  double elu_alpha = 1.0;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Every learned weight of the model. Also used as the gradient container.
struct VemoParams {
  std::vector<GruLayerParams> encoder;
  std::vector<Branch> branches;  // a_x, a_y, yaw_rate, v_x

  std::size_t inputs() const { return encoder.empty() ? 0 : encoder.front().inputs(); }
  std::size_t latent_dim() const { return encoder.empty() ? 0 : encoder.back().units(); }

  /// Structural invariants: non-empty chained encoder, exactly four branches
  /// each reading the latent and ending in one output.
  void validate() const {
    if (encoder.empty()) throw InvalidArgument("model has no encoder layers");
    for (std::size_t i = 0; i < encoder.size(); ++i) {
      encoder[i].check_shapes();
      if (i > 0 && encoder[i].inputs() != encoder[i - 1].units()) {
        throw InvalidArgument("encoder layer " + std::to_string(i) + " input does not match previous layer");
      }
    }
    if (branches.size() != kNumBranches) {
      throw InvalidArgument("model must have exactly four decoder branches, found " + std::to_string(branches.size()));
    }
    for (std::size_t b = 0; b < branches.size(); ++b) {
      const auto& br = branches[b];
      if (br.empty()) throw InvalidArgument("decoder branch " + std::to_string(b) + " is empty");
      std::size_t width = latent_dim();
      for (const auto& layer : br) {
        if (layer.inputs() != width) {
          throw InvalidArgument("decoder branch " + std::to_string(b) + " does not chain from the latent");
        }
        width = layer.outputs();
      }
      if (width != 1) throw InvalidArgument("decoder branch " + std::to_string(b) + " must end in one output");
    }
  }

  Architecture architecture() const {
    Architecture a;
    a.inputs = inputs();
    a.encoder_units.clear();
    for (const auto& l : encoder) a.encoder_units.push_back(l.units());
    a.branch_hidden.clear();
    if (!branches.empty()) {
      for (std::size_t i = 0; i + 1 < branches.front().size(); ++i) a.branch_hidden.push_back(branches.front()[i].outputs());
      if (branches.front().size() > 1) a.branch_activation = branches.front().front().activation;
      a.elu_alpha = branches.front().front().alpha;
    }
    if (!encoder.empty()) {
      a.encoder_gate = encoder.front().gate;
      a.elu_alpha = encoder.front().alpha;
    }
    return a;
  }

  /// Visits every tensor in a fixed order with a stable name.
  template <typename F>
  void for_each_tensor(F&& fn) {
    visit(*this, fn);
  }
  template <typename F>
  void for_each_tensor(F&& fn) const {
    visit(*this, fn);
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for_each_tensor([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  /// Same shapes and activations, all weights zero.
  VemoParams zeros_like() const {
    VemoParams z = *this;
    z.for_each_tensor([](const std::string&, Matrix& m) { m.setZero(); });
    return z;
  }

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& fn) {
    for (std::size_t i = 0; i < self.encoder.size(); ++i) {
      const std::string prefix = "encoder." + std::to_string(i) + ".";
      self.encoder[i].for_each_tensor([&](const char* name, auto& m) { fn(prefix + name, m); });
    }
    for (std::size_t b = 0; b < self.branches.size(); ++b) {
      const std::string branch = b < kNumStates ? std::string(kStateNames[b]) : std::to_string(b);
      for (std::size_t i = 0; i < self.branches[b].size(); ++i) {
        fn("branch." + branch + "." + std::to_string(i) + ".w", self.branches[b][i].w);
      }
    }
  }
};

/// Uniform weights in +-sqrt(1 / fan_in), drawn in tensor visiting order.
inline VemoParams init_params(const Architecture& arch, std::uint64_t seed) {
  if (arch.inputs == 0 || arch.encoder_units.empty()) throw InvalidArgument("architecture needs inputs and an encoder");
  for (auto u : arch.encoder_units) {
    if (u == 0) throw InvalidArgument("encoder widths must be positive");
  }
  for (auto u : arch.branch_hidden) {
    if (u == 0) throw InvalidArgument("branch widths must be positive");
  }
  VemoParams p;
  std::size_t width = arch.inputs;
  for (auto units : arch.encoder_units) {
    auto layer = GruLayerParams::zeros(width, units, arch.encoder_gate);
    layer.alpha = arch.elu_alpha;
    p.encoder.push_back(std::move(layer));
    width = units;
  }
  for (std::size_t b = 0; b < kNumBranches; ++b) {
    Branch br;
    std::size_t in = width;
    for (auto hidden : arch.branch_hidden) {
      br.push_back({Matrix::Zero(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(in)),
                    arch.branch_activation, arch.elu_alpha});
      in = hidden;
    }
    br.push_back({Matrix::Zero(1, static_cast<Eigen::Index>(in)), Activation::linear, arch.elu_alpha});
    p.branches.push_back(std::move(br));
  }

  std::mt19937_64 rng(seed);
  p.for_each_tensor([&](const std::string&, Matrix& m) {
    const double limit = std::sqrt(1.0 / static_cast<double>(m.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
    }
  });
  return p;
}

/// Cached state of a model forward pass over a batch.
struct ModelTrace {
  std::vector<GruTrace> encoder;
  Matrix latent;                                // latent x batch
  std::vector<std::vector<Matrix>> branch_out;  // per branch, output of every dense layer
  Matrix prediction;                            // 4 x batch
};

/// Packs windows (row-major steps x 8 slabs) into the time-major layout.
inline SequenceBatch pack_windows(std::span<const std::span<const double>> windows, std::size_t steps,
                                  std::size_t features = kNumChannels) {
  SequenceBatch seq(features, steps, windows.size());
  const std::size_t batch = windows.size();
  for (std::size_t b = 0; b < batch; ++b) {
    if (windows[b].size() != steps * features) throw InvalidArgument("window has the wrong shape");
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t c = 0; c < features; ++c) {
        seq.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t * batch + b)) = windows[b][t * features + c];
      }
    }
  }
  return seq;
}

inline ModelTrace model_forward(const VemoParams& params, SequenceBatch inputs) {
  if (inputs.features() != params.inputs()) {
    throw InvalidArgument("model expects " + std::to_string(params.inputs()) + " input channels, got " +
                          std::to_string(inputs.features()));
  }
  if (inputs.steps == 0 || inputs.batch == 0) throw InvalidArgument("empty input batch");
  ModelTrace tr;
  tr.encoder.reserve(params.encoder.size());
  const std::size_t steps = inputs.steps;
  const std::size_t batch = inputs.batch;
  SequenceBatch seq = std::move(inputs);
  for (std::size_t i = 0; i < params.encoder.size(); ++i) {
    tr.encoder.push_back(gru_forward(params.encoder[i], std::move(seq)));
    if (i + 1 < params.encoder.size()) seq = SequenceBatch(tr.encoder.back().h, steps, batch);
  }
  tr.latent = gru_output(tr.encoder.back(), false);

  tr.prediction.resize(static_cast<Eigen::Index>(params.branches.size()), static_cast<Eigen::Index>(batch));
  tr.branch_out.resize(params.branches.size());
  for (std::size_t b = 0; b < params.branches.size(); ++b) {
    const Matrix* in = &tr.latent;
    auto& outs = tr.branch_out[b];
    outs.reserve(params.branches[b].size());
    for (const auto& layer : params.branches[b]) {
      Matrix y = layer.w * *in;
      apply_inplace(layer.activation, y, layer.alpha);
      outs.push_back(std::move(y));
      in = &outs.back();
    }
    tr.prediction.row(static_cast<Eigen::Index>(b)) = outs.back();
  }
  return tr;
}

/// Gradients for all weights given d loss / d prediction (4 x batch).
inline VemoParams model_backward(const VemoParams& params, const ModelTrace& tr, const Matrix& prediction_grad) {
  VemoParams grad = params.zeros_like();
  const auto batch = tr.latent.cols();
  Matrix latent_grad = Matrix::Zero(tr.latent.rows(), batch);

  for (std::size_t b = 0; b < params.branches.size(); ++b) {
    const auto& br = params.branches[b];
    Matrix g = prediction_grad.row(static_cast<Eigen::Index>(b));
    for (std::size_t i = br.size(); i-- > 0;) {
      backprop_activation(br[i].activation, g, tr.branch_out[b][i], br[i].alpha);
      const Matrix& in = i == 0 ? tr.latent : tr.branch_out[b][i - 1];
      grad.branches[b][i].w.noalias() = g * in.transpose();
      Matrix next = br[i].w.transpose() * g;
      g = std::move(next);
    }
    latent_grad += g;
  }

  Matrix upstream = std::move(latent_grad);
  for (std::size_t i = params.encoder.size(); i-- > 0;) {
    auto back = gru_backward(params.encoder[i], tr.encoder[i], upstream);
    grad.encoder[i].w_z = std::move(back.grad.w_z);
    grad.encoder[i].w_r = std::move(back.grad.w_r);
    grad.encoder[i].w_h = std::move(back.grad.w_h);
    grad.encoder[i].u_z = std::move(back.grad.u_z);
    grad.encoder[i].u_r = std::move(back.grad.u_r);
    grad.encoder[i].u_h = std::move(back.grad.u_h);
    upstream = std::move(back.input_grad);
  }
  return grad;
}

/// Sum over channels and batch of |prediction - target|, and its gradient
/// (sign, zero at exact ties).
inline double absolute_error_sum(const Matrix& prediction, const Matrix& target, Matrix* grad) {
  const Matrix diff = prediction - target;
  if (grad) *grad = diff.unaryExpr([](double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); });
  return diff.cwiseAbs().sum();
}

/// Scaled next state for one window (k x 8, row-major).
inline StateArray vemo_forward(const VemoParams& params, std::span<const double> window, std::size_t steps) {
  if (window.size() != steps * kNumChannels) throw InvalidArgument("window must have shape (k, 8)");
  const std::array<std::span<const double>, 1> one{window};
  const auto tr = model_forward(params, pack_windows(one, steps));
  StateArray out{};
  for (std::size_t s = 0; s < kNumStates; ++s) out[s] = tr.prediction(static_cast<Eigen::Index>(s), 0);
  return out;
}

struct LossAndGradient {
  double loss = 0.0;
  VemoParams gradient;
};

/// Mean absolute error over the four channels for one window, with the full
/// gradient. Branch gradients meet and sum in the shared encoder.
inline LossAndGradient vemo_backward(const VemoParams& params, std::span<const double> window, std::size_t steps,
                                     const StateArray& target) {
  if (window.size() != steps * kNumChannels) throw InvalidArgument("window must have shape (k, 8)");
  const std::array<std::span<const double>, 1> one{window};
  const auto tr = model_forward(params, pack_windows(one, steps));
  Matrix t(static_cast<Eigen::Index>(kNumStates), 1);
  for (std::size_t s = 0; s < kNumStates; ++s) t(static_cast<Eigen::Index>(s), 0) = target[s];
  Matrix g;
  const double sum = absolute_error_sum(tr.prediction, t, &g);
  g /= static_cast<double>(kNumStates);
  return {sum / static_cast<double>(kNumStates), model_backward(params, tr, g)};
}

}  // namespace vemo::nn
