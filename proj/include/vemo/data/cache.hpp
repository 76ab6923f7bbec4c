// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vemo/channels.hpp"
#include "vemo/data/windows.hpp"
#include "vemo/error.hpp"
#include "vemo/util/binary_io.hpp"

namespace vemo::data {

// Dataset cache layout, all integers u64 and reals f64 little-endian:
//   "VEMODS01" | count | window | channels_in (8) | channels_out (4)
//   | 8 scaling factors | sample_rate_hz | cutoff_hz
//   | label count | labels (len + bytes) | provenance (len + bytes)
//   | inputs (count*window*8) | targets (count*4)
inline constexpr std::string_view kDatasetMagic = "VEMODS01";

inline util::BinaryWriter encode_dataset(const WindowedDataset& ds) {
  util::BinaryWriter w;
  w.bytes(kDatasetMagic);
  w.u64(ds.size());
  w.u64(ds.window());
  w.u64(kNumChannels);
  w.u64(kNumStates);
  w.f64s(ds.scaling().factors());
  w.f64(ds.sample_rate_hz);
  w.f64(ds.cutoff_hz);
  w.u64(ds.source_labels.size());
  for (const auto& l : ds.source_labels) w.str(l);
  w.str(ds.provenance);
  w.f64s(ds.inputs());
  w.f64s(ds.targets());
  return w;
}

inline WindowedDataset decode_dataset(util::BinaryReader& r) {
  if (r.bytes(kDatasetMagic.size()) != kDatasetMagic) {
    throw FormatError("not a dataset cache or unsupported version (expected magic VEMODS01)");
  }
  const auto count = r.u64();
  const auto window = r.u64();
  const auto channels_in = r.u64();
  const auto channels_out = r.u64();
  if (channels_in != kNumChannels || channels_out != kNumStates) {
    throw FormatError("dataset cache channel layout is not 8 inputs / 4 outputs");
  }
  if (window == 0) throw FormatError("dataset cache declares zero window length");
  ChannelVector factors{};
  r.f64s(factors);
  const double rate = r.f64();
  const double cutoff = r.f64();
  const auto n_labels = r.count(r.u64(), 8);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n_labels; ++i) labels.push_back(r.str());
  std::string provenance = r.str();

  const std::size_t n_in = r.count(count, 8 * window * kNumChannels) * window * kNumChannels;
  std::vector<double> inputs(n_in);
  r.f64s(inputs);
  std::vector<double> targets(r.count(count, 8 * kNumStates) * kNumStates);
  r.f64s(targets);
  if (!r.at_end()) throw FormatError("dataset cache has trailing bytes");

  WindowedDataset ds(window, signal::ScalingTable(factors), std::move(inputs), std::move(targets));
  ds.sample_rate_hz = rate;
  ds.cutoff_hz = cutoff;
  ds.source_labels = std::move(labels);
  ds.provenance = std::move(provenance);
  return ds;
}

inline void save_dataset(const WindowedDataset& ds, const std::string& path) {
  encode_dataset(ds).save(path);
}

inline WindowedDataset load_dataset(const std::string& path) {
  auto r = util::BinaryReader::from_file(path);
  return decode_dataset(r);
}

}  // namespace vemo::data
