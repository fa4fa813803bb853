// Copyright 2026 The dynsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian byte buffers for the on-disk formats.

#ifndef DYNSIM_IO_BINARY_H_
#define DYNSIM_IO_BINARY_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

#include "dynsim/common.h"

namespace dynsim {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class ByteWriter {
 public:
  void Bytes(std::string_view b) { buf_.append(b); }
  void U8(std::uint8_t v) { Raw(&v, 1); }
  void U32(std::uint32_t v) { Raw(&v, 4); }
  void U64(std::uint64_t v) { Raw(&v, 8); }
  void F64(double v) { Raw(&v, 8); }
  void F64s(std::span<const double> v) { Raw(v.data(), v.size() * 8); }
  // u32 length prefix followed by the bytes.
  void String(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    Bytes(s);
  }

  const std::string& buffer() const { return buf_; }
  std::string Release() { return std::move(buf_); }

 private:
  void Raw(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint64_t offset() const { return pos_; }
  bool AtEnd() const { return pos_ == data_.size(); }
  std::size_t Remaining() const { return data_.size() - pos_; }

  std::string_view Bytes(std::size_t n, const char* what) {
    Need(n, what);
    std::string_view v = data_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::uint8_t U8(const char* what) { return Pod<std::uint8_t>(what); }
  std::uint32_t U32(const char* what) { return Pod<std::uint32_t>(what); }
  std::uint64_t U64(const char* what) { return Pod<std::uint64_t>(what); }
  double F64(const char* what) { return Pod<double>(what); }
  void F64s(std::span<double> out, const char* what) {
    Need(out.size() * 8, what);
    std::memcpy(out.data(), data_.data() + pos_, out.size() * 8);
    pos_ += out.size() * 8;
  }
  std::string String(const char* what) {
    const std::uint32_t n = U32(what);
    return std::string(Bytes(n, what));
  }

 private:
  void Need(std::size_t n, const char* what) {
    if (Remaining() < n) {
      throw FormatError(std::string("truncated input reading ") + what, pos_);
    }
  }
  template <typename T>
  T Pod(const char* what) {
    Need(sizeof(T), what);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view data_;
  std::uint64_t pos_ = 0;
};

std::string ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::string_view bytes);

}  // namespace dynsim

#endif  // DYNSIM_IO_BINARY_H_
