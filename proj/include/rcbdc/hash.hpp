#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>

#include "rcbdc/bytes.hpp"

namespace rcbdc {

using Digest = std::array<std::uint8_t, 32>;

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    enforce(ctx_ && EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) == 1, Errc::io_error,
            "sha256 init");
  }

  Sha256& update(ByteView b) {
    EVP_DigestUpdate(ctx_.get(), b.data(), b.size());
    return *this;
  }
  Sha256& update(std::string_view s) { return update(as_bytes(s)); }
  Sha256& update(const Digest& d) { return update(ByteView(d)); }
  Sha256& u8(std::uint8_t v) { return update(ByteView(&v, 1)); }
  Sha256& u32(std::uint32_t v) {
    std::uint8_t b[4] = {std::uint8_t(v >> 24), std::uint8_t(v >> 16), std::uint8_t(v >> 8),
                         std::uint8_t(v)};
    return update(ByteView(b, 4));
  }

  Digest final() {
    Digest d{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), d.data(), &len);
    return d;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline Digest sha256(ByteView b) {
  Digest d{};
  unsigned int len = 0;
  EVP_Digest(b.data(), b.size(), d.data(), &len, EVP_sha256(), nullptr);
  return d;
}

inline Digest sha256(std::string_view s) { return sha256(as_bytes(s)); }

inline Digest hmac_sha256(ByteView key, ByteView msg) {
  Digest d{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(), msg.size(), d.data(),
       &len);
  return d;
}

inline std::string to_hex(const Digest& d) { return to_hex(ByteView(d)); }

}  // namespace rcbdc
