// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vemo/error.hpp"

namespace vemo::util {

// Little-endian encoders used by the binary artifacts. Byte order is fixed
// independent of the host.
class BinaryWriter {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void f64s(std::span<const double> values) {
    for (double v : values) f64(v);
  }

  void str(std::string_view s) {
    u64(s.size());
    bytes(s);
  }

  const std::vector<char>& buffer() const noexcept { return buf_; }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw InvalidArgument("failed writing '" + path + "'");
  }

 private:
  std::vector<char> buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::vector<char> data) : data_(std::move(data)) {}

  static BinaryReader from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return BinaryReader(std::move(data));
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  void f64s(std::span<double> out) {
    need(8 * out.size());
    for (double& v : out) v = f64();
  }

  std::string str() {
    const auto n = u64();
    if (n > remaining()) throw FormatError("truncated file: string length exceeds payload");
    return bytes(static_cast<std::size_t>(n));
  }

  /// Guards counts read from a header before they size an allocation.
  std::size_t count(std::uint64_t n, std::size_t element_bytes) const {
    if (element_bytes != 0 && n > remaining() / element_bytes) {
      throw FormatError("truncated file: declared size exceeds payload");
    }
    return static_cast<std::size_t>(n);
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) throw FormatError("truncated file");
  }

  std::vector<char> data_;
  std::size_t pos_ = 0;
};

}  // namespace vemo::util
