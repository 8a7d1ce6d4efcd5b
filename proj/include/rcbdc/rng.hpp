#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "rcbdc/hash.hpp"

namespace rcbdc {

// Deterministic SHA-256 counter-mode generator. A fixed seed reproduces the
// same stream on every platform; `from_os` seeds from the system entropy
// source for non-test use.
class Rng {
 public:
  explicit Rng(ByteView seed) : key_(Sha256().update("rcbdc/rng/v1").update(seed).final()) {}
  explicit Rng(std::string_view seed) : Rng(as_bytes(seed)) {}
  explicit Rng(std::uint64_t seed) : Rng(seed_bytes(seed)) {}

  static Rng from_os() {
    std::random_device rd;
    Bytes b(32);
    for (auto& x : b) x = static_cast<std::uint8_t>(rd());
    return Rng(ByteView(b));
  }

  // Independent child stream.
  Rng split(std::uint64_t stream) const {
    auto b = seed_bytes(stream);
    return Rng(ByteView(Sha256().update(key_).update(ByteView(b)).final()));
  }

  void fill(std::uint8_t* out, std::size_t n) {
    while (n > 0) {
      if (pos_ == block_.size()) refill();
      std::size_t take = std::min(n, block_.size() - pos_);
      std::copy_n(block_.data() + pos_, take, out);
      pos_ += take;
      out += take;
      n -= take;
    }
  }

  std::uint64_t next_u64() {
    std::uint8_t b[8];
    fill(b, 8);
    std::uint64_t v = 0;
    for (auto c : b) v = (v << 8) | c;
    return v;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound) by rejection sampling.
  std::uint64_t below(std::uint64_t bound) {
    enforce(bound > 0, Errc::invalid_argument, "empty range");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
      auto v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  mpz_class below(const mpz_class& bound) {
    enforce(bound > 0, Errc::invalid_argument, "empty range");
    std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
    std::size_t nbytes = (bits + 7) / 8;
    Bytes buf(nbytes);
    for (;;) {
      fill(buf.data(), nbytes);
      if (bits % 8 != 0) buf[0] &= static_cast<std::uint8_t>((1u << (bits % 8)) - 1);
      mpz_class v = read_fixed(buf);
      if (v < bound) return v;
    }
  }

  // UniformRandomBitGenerator interface, for std::shuffle and friends.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return UINT64_MAX; }
  result_type operator()() { return next_u64(); }

 private:
  static Bytes seed_bytes(std::uint64_t v) {
    Bytes b(8);
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
    return b;
  }

  void refill() {
    block_ = Sha256().update(key_).u32(static_cast<std::uint32_t>(counter_ >> 32))
                 .u32(static_cast<std::uint32_t>(counter_)).final();
    ++counter_;
    pos_ = 0;
  }

  Digest key_;
  Digest block_{};
  std::size_t pos_ = block_.size();
  std::uint64_t counter_ = 0;
};

}  // namespace rcbdc
