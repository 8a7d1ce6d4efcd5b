#pragma once

#include <cstdint>
#include <vector>

#include "rcbdc/pedersen.hpp"

namespace rcbdc {

// Fiat-Shamir OR proof that d = h^s (bit 0) or d/g = h^s (bit 1).
struct BitOrProof {
  GroupElement t0, t1;
  Scalar e0, e1;
  Scalar z0, z1;

  bool operator==(const BitOrProof&) const = default;
};

// Bit-decomposition range proof for a value in [0, 2^n).
struct RangeProof {
  std::vector<Commitment> bit_commitments;
  std::vector<BitOrProof> or_proofs;

  bool operator==(const RangeProof&) const = default;
};

// Largest width that keeps 2^n well below q: every n with 2^n < q for tiny
// groups, otherwise min(32, bits(q)/2).
inline unsigned default_range_bits(const Group& grp) {
  if (grp.q_bits() < 16) {
    unsigned n = 0;
    while ((mpz_class(1) << (n + 1)) < grp.q()) ++n;
    return n;
  }
  return static_cast<unsigned>(std::min<std::size_t>(32, grp.q_bits() / 2));
}

inline void validate_range_bits(const Group& grp, unsigned n_bits) {
  enforce(n_bits >= 1 && n_bits <= 63, Errc::invalid_argument, "range width must be in [1, 63]");
  enforce((mpz_class(1) << n_bits) < grp.q(), Errc::invalid_argument, "2^n must be smaller than q");
}

inline bool value_in_range(const Scalar& v, unsigned n_bits) { return v.value() < (mpz_class(1) << n_bits); }

namespace detail {

inline Scalar bit_challenge(const Group& grp, const Commitment& target, std::uint32_t index,
                            const Commitment& d, const GroupElement& t0, const GroupElement& t1) {
  Sha256 h;
  h.update("rcbdc/range/v1").update(grp.digest());
  grp.write(h, target.point);
  h.u32(index);
  grp.write(h, d.point);
  grp.write(h, t0);
  grp.write(h, t1);
  return grp.scalar_from_digest(h.final());
}

// Statement element for branch b: d for bit 0, d/g for bit 1.
inline GroupElement branch_base(const Group& grp, const Commitment& d, int bit) {
  return bit == 0 ? d.point : grp.div(d.point, grp.g());
}

inline BitOrProof prove_bit(const Group& grp, const Commitment& target, std::uint32_t index,
                            const Commitment& d, int bit, const Scalar& s, Rng& rng) {
  const int other = 1 - bit;
  Scalar k = grp.random_scalar(rng);
  Scalar e_sim = grp.random_scalar_with_zero(rng);
  Scalar z_sim = grp.random_scalar_with_zero(rng);

  GroupElement t_real = grp.pow_h(k);
  // Simulated transcript: t = h^z * D^e
  GroupElement t_sim = grp.mul(grp.pow_h(z_sim), grp.pow(branch_base(grp, d, other), e_sim));

  const GroupElement& t0 = bit == 0 ? t_real : t_sim;
  const GroupElement& t1 = bit == 0 ? t_sim : t_real;
  Scalar e = bit_challenge(grp, target, index, d, t0, t1);
  Scalar e_real = grp.sub(e, e_sim);
  Scalar z_real = grp.sub(k, grp.mul(s, e_real));

  BitOrProof p;
  p.t0 = t0;
  p.t1 = t1;
  if (bit == 0) {
    p.e0 = e_real, p.z0 = z_real, p.e1 = e_sim, p.z1 = z_sim;
  } else {
    p.e0 = e_sim, p.z0 = z_sim, p.e1 = e_real, p.z1 = z_real;
  }
  return p;
}

inline bool verify_bit(const Group& grp, const Commitment& target, std::uint32_t index, const Commitment& d,
                       const BitOrProof& p) {
  if (grp.add(p.e0, p.e1) != bit_challenge(grp, target, index, d, p.t0, p.t1)) return false;
  if (grp.mul(grp.pow_h(p.z0), grp.pow(branch_base(grp, d, 0), p.e0)) != p.t0) return false;
  return grp.mul(grp.pow_h(p.z1), grp.pow(branch_base(grp, d, 1), p.e1)) == p.t1;
}

}  // namespace detail

// Randomness s_0..s_{n-2} is random; s_{n-1} is solved so that
// sum(2^i s_i) = r, which makes prod(d_i^(2^i)) equal the target exactly.
inline RangeProof prove_range(const Group& grp, const Opening& opening, unsigned n_bits, Rng& rng) {
  validate_range_bits(grp, n_bits);
  enforce(value_in_range(opening.value, n_bits), Errc::value_out_of_range,
          "value does not fit in " + std::to_string(n_bits) + " bits");
  const Commitment target = commit(grp, opening);
  const mpz_class& v = opening.value.value();

  std::vector<Scalar> s(n_bits);
  Scalar acc = grp.scalar(0L);
  for (unsigned i = 0; i + 1 < n_bits; ++i) {
    s[i] = grp.random_scalar(rng);
    acc = grp.add(acc, grp.mul(grp.scalar(mpz_class(1) << i), s[i]));
  }
  Scalar top_weight = grp.scalar(mpz_class(1) << (n_bits - 1));
  s[n_bits - 1] = grp.mul(grp.sub(opening.randomness, acc), grp.inverse(top_weight));

  RangeProof proof;
  proof.bit_commitments.reserve(n_bits);
  proof.or_proofs.reserve(n_bits);
  for (unsigned i = 0; i < n_bits; ++i) {
    int bit = mpz_tstbit(v.get_mpz_t(), i);
    Commitment d = commit(grp, {grp.scalar(static_cast<long>(bit)), s[i]});
    proof.bit_commitments.push_back(d);
    proof.or_proofs.push_back(detail::prove_bit(grp, target, i, d, bit, s[i], rng));
  }
  return proof;
}

inline bool verify_range(const Group& grp, const Commitment& c, const RangeProof& proof, unsigned n_bits) {
  if (proof.bit_commitments.size() != n_bits || proof.or_proofs.size() != n_bits) return false;
  // prod d_i^(2^i), evaluated Horner-style from the top bit down
  GroupElement product = grp.identity();
  for (unsigned i = n_bits; i-- > 0;)
    product = grp.mul(grp.mul(product, product), proof.bit_commitments[i].point);
  if (product != c.point) return false;
  for (unsigned i = 0; i < n_bits; ++i)
    if (!detail::verify_bit(grp, c, i, proof.bit_commitments[i], proof.or_proofs[i])) return false;
  return true;
}

inline void write(const Group& grp, ByteWriter& w, const RangeProof& p) {
  w.u32(static_cast<std::uint32_t>(p.bit_commitments.size()));
  for (std::size_t i = 0; i < p.bit_commitments.size(); ++i) {
    const auto& o = p.or_proofs[i];
    grp.write(w, p.bit_commitments[i].point);
    grp.write(w, o.t0);
    grp.write(w, o.t1);
    for (const auto* s : {&o.e0, &o.e1, &o.z0, &o.z1}) grp.write(w, *s);
  }
}

inline RangeProof read_range_proof(const Group& grp, ByteReader& r) {
  std::uint32_t n = r.u32();
  enforce(n <= 64, r.error_code(), "range proof too long");
  RangeProof p;
  for (std::uint32_t i = 0; i < n; ++i) {
    p.bit_commitments.push_back({grp.read_element(r)});
    BitOrProof o;
    o.t0 = grp.read_element(r);
    o.t1 = grp.read_element(r);
    o.e0 = grp.read_scalar(r);
    o.e1 = grp.read_scalar(r);
    o.z0 = grp.read_scalar(r);
    o.z1 = grp.read_scalar(r);
    p.or_proofs.push_back(o);
  }
  return p;
}

}  // namespace rcbdc
