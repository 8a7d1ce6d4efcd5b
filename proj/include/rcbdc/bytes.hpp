#pragma once

#include <gmpxx.h>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rcbdc/errors.hpp"

namespace rcbdc {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::size_t byte_width(const mpz_class& v) { return (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8; }

// Big-endian, left-padded to `width`. Throws if the value does not fit.
inline void write_fixed(Bytes& out, const mpz_class& v, std::size_t width) {
  enforce(v >= 0, Errc::invalid_argument, "negative integer cannot be encoded");
  std::size_t need = v == 0 ? 0 : byte_width(v);
  enforce(need <= width, Errc::invalid_argument, "integer wider than field");
  std::size_t start = out.size();
  out.resize(start + width, 0);
  if (need > 0) {
    std::size_t count = 0;
    mpz_export(out.data() + start + (width - need), &count, 1, 1, 1, 0, v.get_mpz_t());
  }
}

inline mpz_class read_fixed(ByteView in) {
  mpz_class v;
  if (!in.empty()) mpz_import(v.get_mpz_t(), in.size(), 1, 1, 1, 0, in.data());
  return v;
}

class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  ByteWriter& u16(std::uint16_t v) { return be(v, 2); }
  ByteWriter& u32(std::uint32_t v) { return be(v, 4); }
  ByteWriter& u64(std::uint64_t v) { return be(v, 8); }
  ByteWriter& raw(ByteView b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
    return *this;
  }
  ByteWriter& str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    return raw(as_bytes(s));
  }
  ByteWriter& blob(ByteView b) {
    u32(static_cast<std::uint32_t>(b.size()));
    return raw(b);
  }
  ByteWriter& fixed(const mpz_class& v, std::size_t width) {
    write_fixed(buf_, v, width);
    return *this;
  }

  const Bytes& bytes() const& { return buf_; }
  Bytes&& take() && { return std::move(buf_); }

 private:
  ByteWriter& be(std::uint64_t v, int n) {
    for (int i = n - 1; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  Bytes buf_;
};

// Reads fail with `code` (malformed-frame by default) on underflow.
class ByteReader {
 public:
  explicit ByteReader(ByteView in, Errc code = Errc::malformed_frame) : in_(in), code_(code) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(be(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::uint64_t u64() { return be(8); }
  ByteView raw(std::size_t n) {
    need(n);
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::string str() {
    auto b = raw(u32());
    return {b.begin(), b.end()};
  }
  Bytes blob() {
    auto b = raw(u32());
    return {b.begin(), b.end()};
  }
  mpz_class fixed(std::size_t width) { return read_fixed(raw(width)); }
  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    std::array<std::uint8_t, N> a{};
    auto b = raw(N);
    std::copy(b.begin(), b.end(), a.begin());
    return a;
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }
  void expect_done() const { enforce(done(), code_, "trailing bytes"); }
  Errc error_code() const { return code_; }

 private:
  void need(std::size_t n) const { enforce(remaining() >= n, code_, "truncated input"); }
  std::uint64_t be(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }

  ByteView in_;
  std::size_t pos_ = 0;
  Errc code_;
};

inline std::string to_hex(ByteView b) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (auto c : b) {
    s.push_back(digits[c >> 4]);
    s.push_back(digits[c & 15]);
  }
  return s;
}

inline Bytes from_hex(std::string_view s) {
  enforce(s.size() % 2 == 0, Errc::invalid_argument, "odd-length hex");
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    fail(Errc::invalid_argument, "bad hex digit");
  };
  Bytes out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
  return out;
}

}  // namespace rcbdc
