// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "vemo/channels.hpp"
#include "vemo/error.hpp"
#include "vemo/nn/vemo.hpp"
#include "vemo/signal/scaling.hpp"
#include "vemo/util/binary_io.hpp"

namespace vemo::nn {

/// Data contract a model was trained under; stored in the checkpoint header.
struct ModelMeta {
  std::size_t window = 100;
  signal::ScalingTable scaling = signal::ScalingTable::standard();
  double sample_rate_hz = 100.0;
  double cutoff_hz = 0.0;
  std::string provenance;

  friend bool operator==(const ModelMeta&, const ModelMeta&) = default;
};

struct Checkpoint {
  VemoParams params;
  ModelMeta meta;
};

// Checkpoint layout, integers u64 and reals f64 little-endian:
//   "VEMOCK01" | window | 8 scaling factors | sample_rate_hz | cutoff_hz
//   | provenance (len + bytes)
//   | encoder layer count | per layer: inputs, units, gate activation, alpha
//   | branch count | per branch: layer count | per layer: inputs, outputs,
//     activation, alpha
//   | tensors in visiting order: rows, cols, row-major values
inline constexpr std::string_view kCheckpointMagic = "VEMOCK01";

inline util::BinaryWriter encode_checkpoint(const VemoParams& params, const ModelMeta& meta) {
  params.validate();
  util::BinaryWriter w;
  w.bytes(kCheckpointMagic);
  w.u64(meta.window);
  w.f64s(meta.scaling.factors());
  w.f64(meta.sample_rate_hz);
  w.f64(meta.cutoff_hz);
  w.str(meta.provenance);

  w.u64(params.encoder.size());
  for (const auto& l : params.encoder) {
    w.u64(l.inputs());
    w.u64(l.units());
    w.u64(static_cast<std::uint64_t>(l.gate));
    w.f64(l.alpha);
  }
  w.u64(params.branches.size());
  for (const auto& br : params.branches) {
    w.u64(br.size());
    for (const auto& l : br) {
      w.u64(l.inputs());
      w.u64(l.outputs());
      w.u64(static_cast<std::uint64_t>(l.activation));
      w.f64(l.alpha);
    }
  }
  params.for_each_tensor([&](const std::string&, const Matrix& m) {
    w.u64(static_cast<std::uint64_t>(m.rows()));
    w.u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
    }
  });
  return w;
}

namespace detail {

inline Activation read_activation(util::BinaryReader& r) {
  const auto v = r.u64();
  if (v > static_cast<std::uint64_t>(Activation::elu)) throw FormatError("checkpoint names an unknown activation");
  return static_cast<Activation>(v);
}

inline std::size_t read_dim(util::BinaryReader& r) {
  const auto v = r.u64();
  if (v == 0 || v > (1u << 20)) throw FormatError("checkpoint declares an implausible layer width");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline Checkpoint decode_checkpoint(util::BinaryReader& r) {
  if (r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError("not a checkpoint or unsupported version (expected magic VEMOCK01)");
  }
  Checkpoint ck;
  ck.meta.window = static_cast<std::size_t>(r.u64());
  ChannelVector factors{};
  r.f64s(factors);
  try {
    ck.meta.scaling = signal::ScalingTable(factors);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint scaling table invalid: ") + e.what());
  }
  ck.meta.sample_rate_hz = r.f64();
  ck.meta.cutoff_hz = r.f64();
  ck.meta.provenance = r.str();

  const auto n_enc = r.count(r.u64(), 32);
  for (std::size_t i = 0; i < n_enc; ++i) {
    const auto in = detail::read_dim(r);
    const auto units = detail::read_dim(r);
    auto layer = GruLayerParams::zeros(in, units, detail::read_activation(r));
    layer.alpha = r.f64();
    ck.params.encoder.push_back(std::move(layer));
  }
  const auto n_branches = r.count(r.u64(), 8);
  if (n_branches != kNumBranches) {
    throw FormatError("checkpoint has " + std::to_string(n_branches) + " decoder branches; exactly 4 are required");
  }
  for (std::size_t b = 0; b < n_branches; ++b) {
    Branch br;
    const auto n_layers = r.count(r.u64(), 32);
    for (std::size_t i = 0; i < n_layers; ++i) {
      const auto in = detail::read_dim(r);
      const auto out = detail::read_dim(r);
      DenseLayerParams l;
      l.w = Matrix::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
      l.activation = detail::read_activation(r);
      l.alpha = r.f64();
      br.push_back(std::move(l));
    }
    ck.params.branches.push_back(std::move(br));
  }
  try {
    ck.params.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint structure invalid: ") + e.what());
  }

  ck.params.for_each_tensor([&](const std::string& name, Matrix& m) {
    const auto rows = r.u64();
    const auto cols = r.u64();
    if (rows != static_cast<std::uint64_t>(m.rows()) || cols != static_cast<std::uint64_t>(m.cols())) {
      throw FormatError("checkpoint tensor " + name + " shape disagrees with the declared architecture");
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
    }
  });
  if (!r.at_end()) throw FormatError("checkpoint has trailing bytes");
  return ck;
}

inline void save_checkpoint(const VemoParams& params, const ModelMeta& meta, const std::string& path) {
  encode_checkpoint(params, meta).save(path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  auto r = util::BinaryReader::from_file(path);
  return decode_checkpoint(r);
}

}  // namespace vemo::nn
