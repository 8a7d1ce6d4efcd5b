#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "rcbdc/group.hpp"

namespace rcbdc {

// Prefix byte mixed into every challenge hash so a signature made for one
// purpose never verifies for another.
enum class SigDomain : std::uint8_t {
  payer = 0x01,
  balance = 0x02,
  confirmation = 0x03,
  authorization = 0x04,
};

struct SchnorrKeyPair {
  GroupElement base;
  Scalar secret;
  GroupElement public_key;
};

struct Signature {
  Scalar s;
  Scalar e;

  bool operator==(const Signature&) const = default;
};

inline SchnorrKeyPair keypair_from_secret(const Group& grp, const GroupElement& base, const Scalar& secret) {
  return {base, secret, grp.pow(base, secret)};
}

inline SchnorrKeyPair keygen(const Group& grp, const GroupElement& base, Rng& rng) {
  enforce(base != grp.identity(), Errc::invalid_argument, "base must not be the identity");
  return keypair_from_secret(grp, base, grp.random_scalar(rng));
}

// e = H(domain || t || message) mod q
inline Scalar schnorr_challenge(const Group& grp, SigDomain domain, const GroupElement& t, ByteView message) {
  Sha256 h;
  h.update("rcbdc/schnorr/v1").u8(static_cast<std::uint8_t>(domain));
  grp.write(h, t);
  h.update(message);
  return grp.scalar_from_digest(h.final());
}

namespace detail {

// s = k - x*e, with the challenge supplied by `challenge(t)`.
template <class ChallengeFn>
Signature sign_with_nonce(const Group& grp, const SchnorrKeyPair& kp, const Scalar& k, ChallengeFn&& challenge) {
  GroupElement t = grp.pow(kp.base, k);
  Scalar e = challenge(t);
  return {grp.sub(k, grp.mul(kp.secret, e)), e};
}

// t' = base^s * y^e; accept iff challenge(t') == e.
template <class ChallengeFn>
bool verify_with(const Group& grp, const GroupElement& base, const GroupElement& pub, const Signature& sig,
                 ChallengeFn&& challenge) {
  GroupElement t = grp.mul(grp.pow(base, sig.s), grp.pow(pub, sig.e));
  return challenge(t) == sig.e;
}

}  // namespace detail

inline Signature sign(const Group& grp, const SchnorrKeyPair& kp, SigDomain domain, ByteView message, Rng& rng) {
  Scalar k = grp.random_scalar(rng);
  return detail::sign_with_nonce(grp, kp, k, [&](const GroupElement& t) {
    return schnorr_challenge(grp, domain, t, message);
  });
}

inline bool verify(const Group& grp, const GroupElement& base, const GroupElement& pub, SigDomain domain,
                   ByteView message, const Signature& sig) {
  return detail::verify_with(grp, base, pub, sig, [&](const GroupElement& t) {
    return schnorr_challenge(grp, domain, t, message);
  });
}

// alpha = sum(r_in) - sum(r_out) mod q, beta = h^alpha. Returns nullopt when
// alpha is zero; the builder must then resample an output randomness.
inline std::optional<SchnorrKeyPair> balance_key(const Group& grp, std::span<const Scalar> input_randomness,
                                                 std::span<const Scalar> output_randomness) {
  enforce(!input_randomness.empty() || !output_randomness.empty(), Errc::invalid_argument,
          "balance key needs at least one randomness value");
  Scalar alpha = grp.scalar(0L);
  for (const auto& r : input_randomness) alpha = grp.add(alpha, r);
  for (const auto& r : output_randomness) alpha = grp.sub(alpha, r);
  if (alpha.is_zero()) return std::nullopt;
  return keypair_from_secret(grp, grp.h(), alpha);
}

inline void write(const Group& grp, ByteWriter& w, const Signature& s) {
  grp.write(w, s.s);
  grp.write(w, s.e);
}
inline Signature read_signature(const Group& grp, ByteReader& r) {
  Signature s;
  s.s = grp.read_scalar(r);
  s.e = grp.read_scalar(r);
  return s;
}

}  // namespace rcbdc

#ifdef RCBDC_TEST_SEAMS
namespace rcbdc::testing {

// Deterministic-challenge signing for hand-checkable vectors.
template <class ChallengeFn>
Signature sign_with(const Group& grp, const SchnorrKeyPair& kp, const Scalar& nonce, ChallengeFn&& challenge) {
  return detail::sign_with_nonce(grp, kp, nonce, std::forward<ChallengeFn>(challenge));
}

template <class ChallengeFn>
bool verify_with(const Group& grp, const GroupElement& base, const GroupElement& pub, const Signature& sig,
                 ChallengeFn&& challenge) {
  return detail::verify_with(grp, base, pub, sig, std::forward<ChallengeFn>(challenge));
}

}  // namespace rcbdc::testing
#endif
