#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "rcbdc/schnorr.hpp"

namespace rcbdc {

struct MasterSecret {
  std::array<std::uint8_t, 32> seed{};
  std::uint64_t counter = 0;  // next unused derivation index

  static MasterSecret generate(Rng& rng) {
    MasterSecret m;
    rng.fill(m.seed.data(), m.seed.size());
    return m;
  }
};

// private = HMAC(seed, be64(index) || be32(salt)) mod q, bumping salt on zero.
inline SchnorrKeyPair derive_keypair(const Group& grp, const MasterSecret& master, std::uint64_t index) {
  for (std::uint32_t salt = 0;; ++salt) {
    ByteWriter w;
    w.u64(index).u32(salt);
    Digest d = hmac_sha256(ByteView(master.seed.data(), master.seed.size()), w.bytes());
    Scalar x = grp.scalar_from_digest(d);
    if (x.value() != 0) return keypair_from_secret(grp, grp.g(), x);
  }
}

// Derives at master.counter and advances it.
inline SchnorrKeyPair next_keypair(const Group& grp, MasterSecret& master) {
  return derive_keypair(grp, master, master.counter++);
}

// ---- disclosure authorization ----

inline Digest auth_message(const Group& grp, const GroupElement& pubkey, std::string_view purpose) {
  Sha256 h;
  h.update("rcbdc/disclose/v1").update(grp.digest());
  grp.write(h, pubkey);
  h.update(purpose);
  return h.final();
}

struct AuthToken {
  std::string purpose;
  Signature sig;
};

inline AuthToken issue_token(const Group& grp, const SchnorrKeyPair& authorizer, const GroupElement& pubkey,
                             std::string purpose, Rng& rng) {
  auto msg = auth_message(grp, pubkey, purpose);
  return {std::move(purpose), sign(grp, authorizer, SigDomain::authorization, ByteView(msg), rng)};
}

struct RegistryEntry {
  std::string identity;
  std::uint64_t index = 0;
};

struct AccessLogEntry {
  GroupElement pubkey;
  std::string purpose;
  bool granted = false;
  std::string outcome;  // "granted", "unauthorized" or "unknown-pubkey"
};

// Bank-held map from evolving public keys to real identities. Disclosure
// requires a token signed by the configured authorizer; every attempt is
// logged whether or not it succeeds.
class IdentityRegistry {
 public:
  IdentityRegistry(const Group& grp, GroupElement authorizer) : grp_(&grp), authorizer_(authorizer) {}
  IdentityRegistry(IdentityRegistry&& o) noexcept : grp_(o.grp_), authorizer_(o.authorizer_) {
    std::lock_guard lock(o.mu_);
    entries_ = std::move(o.entries_);
    log_ = std::move(o.log_);
  }

  void register_key(const GroupElement& pubkey, std::string identity, std::uint64_t index) {
    std::lock_guard lock(mu_);
    enforce(!entries_.count(pubkey), Errc::duplicate_pubkey, "public key already registered");
    entries_.emplace(pubkey, RegistryEntry{std::move(identity), index});
  }

  std::string disclose(const GroupElement& pubkey, const AuthToken& token) {
    std::lock_guard lock(mu_);
    auto msg = auth_message(*grp_, pubkey, token.purpose);
    if (!verify(*grp_, grp_->g(), authorizer_, SigDomain::authorization, ByteView(msg), token.sig)) {
      log_.push_back({pubkey, token.purpose, false, "unauthorized"});
      fail(Errc::unauthorized, "disclosure token rejected");
    }
    auto it = entries_.find(pubkey);
    if (it == entries_.end()) {
      log_.push_back({pubkey, token.purpose, false, "unknown-pubkey"});
      fail(Errc::unknown_pubkey, "public key is not registered");
    }
    log_.push_back({pubkey, token.purpose, true, "granted"});
    return it->second.identity;
  }

  bool contains(const GroupElement& pubkey) const {
    std::lock_guard lock(mu_);
    return entries_.count(pubkey) != 0;
  }
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }
  std::vector<AccessLogEntry> access_log() const {
    std::lock_guard lock(mu_);
    return log_;
  }
  std::map<GroupElement, RegistryEntry> entries() const {
    std::lock_guard lock(mu_);
    return entries_;
  }
  const GroupElement& authorizer() const { return authorizer_; }

 private:
  const Group* grp_;
  GroupElement authorizer_;
  mutable std::mutex mu_;
  std::map<GroupElement, RegistryEntry> entries_;
  std::vector<AccessLogEntry> log_;
};

// Plaintext registry file (bank role, test deployments).
inline nlohmann::json registry_to_json(const Group& grp, const IdentityRegistry& reg) {
  nlohmann::json j;
  j["authorizer"] = to_hex(grp.encode(reg.authorizer()));
  j["entries"] = nlohmann::json::array();
  for (const auto& [pk, e] : reg.entries())
    j["entries"].push_back({{"pubkey", to_hex(grp.encode(pk))}, {"identity", e.identity}, {"index", e.index}});
  return j;
}

inline IdentityRegistry registry_from_json(const Group& grp, const nlohmann::json& j) {
  auto element = [&](const std::string& hex) {
    Bytes b = from_hex(hex);
    ByteReader r(b, Errc::invalid_argument);
    auto e = grp.read_element(r);
    r.expect_done();
    return e;
  };
  try {
    IdentityRegistry reg(grp, element(j.at("authorizer").get<std::string>()));
    for (const auto& e : j.at("entries"))
      reg.register_key(element(e.at("pubkey").get<std::string>()), e.at("identity").get<std::string>(),
                       e.at("index").get<std::uint64_t>());
    return reg;
  } catch (const nlohmann::json::exception& ex) {
    fail(Errc::invalid_argument, std::string("registry file: ") + ex.what());
  }
}

// ---- encrypted keystore ----
//
// Layout: "RCBK" | u8 version | u32 iterations | salt[16] | nonce[12] |
// ciphertext(seed[32] || be64 counter) | tag[16]. Key = PBKDF2-SHA256.

namespace detail {

constexpr std::uint32_t kKeystoreIterations = 200000;

inline std::array<std::uint8_t, 32> keystore_key(std::string_view passphrase, ByteView salt, std::uint32_t iters) {
  std::array<std::uint8_t, 32> key{};
  enforce(PKCS5_PBKDF2_HMAC(passphrase.data(), static_cast<int>(passphrase.size()), salt.data(),
                            static_cast<int>(salt.size()), static_cast<int>(iters), EVP_sha256(), 32, key.data()) == 1,
          Errc::io_error, "PBKDF2 failed");
  return key;
}

struct CipherCtx {
  EVP_CIPHER_CTX* p = EVP_CIPHER_CTX_new();
  ~CipherCtx() { EVP_CIPHER_CTX_free(p); }
};

}  // namespace detail

inline Bytes seal_master(const MasterSecret& m, std::string_view passphrase, Rng& rng,
                         std::uint32_t iterations = detail::kKeystoreIterations) {
  std::array<std::uint8_t, 16> salt{};
  std::array<std::uint8_t, 12> nonce{};
  rng.fill(salt.data(), salt.size());
  rng.fill(nonce.data(), nonce.size());
  auto key = detail::keystore_key(passphrase, salt, iterations);

  ByteWriter plain;
  plain.raw(ByteView(m.seed.data(), m.seed.size())).u64(m.counter);
  Bytes ct(plain.bytes().size());
  std::array<std::uint8_t, 16> tag{};

  detail::CipherCtx c;
  int len = 0;
  bool ok = EVP_EncryptInit_ex(c.p, EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) == 1 &&
            EVP_EncryptUpdate(c.p, ct.data(), &len, plain.bytes().data(), static_cast<int>(plain.bytes().size())) == 1 &&
            EVP_EncryptFinal_ex(c.p, ct.data() + len, &len) == 1 &&
            EVP_CIPHER_CTX_ctrl(c.p, EVP_CTRL_GCM_GET_TAG, 16, tag.data()) == 1;
  enforce(ok, Errc::io_error, "keystore encryption failed");

  ByteWriter w;
  w.raw(as_bytes("RCBK")).u8(1).u32(iterations).raw(salt).raw(nonce).raw(ct).raw(tag);
  return std::move(w).take();
}

inline MasterSecret open_master(ByteView sealed, std::string_view passphrase) {
  ByteReader r(sealed, Errc::decrypt_failed);
  auto magic = r.raw(4);
  enforce(std::equal(magic.begin(), magic.end(), as_bytes("RCBK").begin()), Errc::decrypt_failed, "not a keystore");
  enforce(r.u8() == 1, Errc::version_mismatch, "unsupported keystore version");
  std::uint32_t iters = r.u32();
  enforce(iters >= 1 && iters <= 10'000'000, Errc::decrypt_failed, "implausible iteration count");
  auto salt = r.array<16>();
  auto nonce = r.array<12>();
  auto ct = r.array<40>();
  auto tag = r.array<16>();
  r.expect_done();
  auto key = detail::keystore_key(passphrase, salt, iters);

  std::array<std::uint8_t, 40> plain{};
  detail::CipherCtx c;
  int len = 0;
  bool ok = EVP_DecryptInit_ex(c.p, EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) == 1 &&
            EVP_DecryptUpdate(c.p, plain.data(), &len, ct.data(), static_cast<int>(ct.size())) == 1 &&
            EVP_CIPHER_CTX_ctrl(c.p, EVP_CTRL_GCM_SET_TAG, 16, tag.data()) == 1 &&
            EVP_DecryptFinal_ex(c.p, plain.data() + len, &len) == 1;
  enforce(ok, Errc::decrypt_failed, "wrong passphrase or corrupted keystore");

  ByteReader pr(plain, Errc::decrypt_failed);
  MasterSecret m;
  m.seed = pr.array<32>();
  m.counter = pr.u64();
  return m;
}

}  // namespace rcbdc
