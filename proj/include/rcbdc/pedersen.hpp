#pragma once

#include <span>
#include <vector>

#include "rcbdc/group.hpp"

namespace rcbdc {

// Secret (x, r) behind a commitment.
struct Opening {
  Scalar value;
  Scalar randomness;

  bool operator==(const Opening&) const = default;
};

struct Commitment {
  GroupElement point;

  bool operator==(const Commitment&) const = default;
  auto operator<=>(const Commitment&) const = default;
};

// c = g^x h^r mod p
inline Commitment commit(const Group& grp, const Opening& o) {
  return {grp.pow_gh(o.value, o.randomness)};
}

inline Opening make_opening(const Group& grp, std::uint64_t value, Rng& rng) {
  return {grp.scalar(mpz_class(static_cast<unsigned long>(value))), grp.random_scalar(rng)};
}

inline bool open_check(const Group& grp, const Commitment& c, const Opening& o) {
  return commit(grp, o) == c;
}

// prod(numerators) / prod(denominators); empty products are 1.
inline GroupElement combine(const Group& grp, std::span<const Commitment> numerators,
                            std::span<const Commitment> denominators) {
  GroupElement num = grp.identity();
  for (const auto& c : numerators) num = grp.mul(num, c.point);
  GroupElement den = grp.identity();
  for (const auto& c : denominators) den = grp.mul(den, c.point);
  return grp.div(num, den);
}

inline Commitment homomorphic_add(const Group& grp, const Commitment& a, const Commitment& b) {
  return {grp.mul(a.point, b.point)};
}

inline Opening add_openings(const Group& grp, const Opening& a, const Opening& b) {
  return {grp.add(a.value, b.value), grp.add(a.randomness, b.randomness)};
}

inline void write(const Group& grp, ByteWriter& w, const Commitment& c) { grp.write(w, c.point); }
inline Commitment read_commitment(const Group& grp, ByteReader& r) { return {grp.read_element(r)}; }

inline void write(const Group& grp, ByteWriter& w, const Opening& o) {
  grp.write(w, o.value);
  grp.write(w, o.randomness);
}
inline Opening read_opening(const Group& grp, ByteReader& r) {
  Opening o;
  o.value = grp.read_scalar(r);
  o.randomness = grp.read_scalar(r);
  return o;
}

}  // namespace rcbdc
