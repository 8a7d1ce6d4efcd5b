#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>

#include "rcbdc/pedersen.hpp"

namespace rcbdc::attack {

// Counter-mode encryption of an amount with a b-bit toy PRF
// f(k; counter) = SHA-256(k || be64(counter)) truncated to b bits.
struct ToyCipherConfig {
  unsigned block_bits = 16;
  std::uint64_t counter = 0;

  std::uint64_t mask() const { return block_bits == 64 ? ~0ULL : (1ULL << block_bits) - 1; }
};

inline void validate(const ToyCipherConfig& c) {
  enforce(c.block_bits >= 8 && c.block_bits <= 32, Errc::invalid_argument, "block width must be 8..32 bits");
}

inline std::uint64_t toy_prf(const ToyCipherConfig& c, std::uint64_t key) {
  ByteWriter w;
  w.u64(key).u64(c.counter);
  Digest d = sha256(w.bytes());
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
  return v & c.mask();
}

inline std::uint64_t encrypt(const ToyCipherConfig& c, std::uint64_t key, std::uint64_t m) { return toy_prf(c, key) ^ m; }
inline std::uint64_t decrypt(const ToyCipherConfig& c, std::uint64_t key, std::uint64_t x) { return toy_prf(c, key) ^ x; }

// Probability that a random substitute key redeems more than q1:
// (2^b - 1 - q1) / 2^b.
inline double theoretical_rate(const ToyCipherConfig& c, std::uint64_t q1) {
  double n = std::ldexp(1.0, static_cast<int>(c.block_bits));
  return (n - 1.0 - static_cast<double>(q1)) / n;
}

struct TrialResult {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double rate() const { return trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0; }
};

// Per trial: honest X = f(k) ^ q1; adversary draws k' and redeems
// q1' = f(k') ^ X, succeeding iff q1' > q1.
inline TrialResult forgery_trial(const ToyCipherConfig& c, std::uint64_t q1, std::uint64_t trials, std::uint64_t seed) {
  validate(c);
  enforce(q1 <= c.mask(), Errc::invalid_argument, "q1 must be below 2^b");
  std::mt19937_64 rng(seed);
  TrialResult res{trials, 0};
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint64_t x = encrypt(c, rng(), q1);
    if (decrypt(c, rng(), x) > q1) ++res.successes;
  }
  return res;
}

// Enumerates every key in [0, 2^b) against one fixed ciphertext.
inline TrialResult exhaustive_rate(const ToyCipherConfig& c, std::uint64_t q1, std::uint64_t x) {
  validate(c);
  TrialResult res{c.mask() + 1, 0};
  for (std::uint64_t k = 0; k <= c.mask(); ++k)
    if (decrypt(c, k, x) > q1) ++res.successes;
  return res;
}

// ---- the same substitution against a Pedersen commitment ----
//
// Given C = g^q1 h^r, the adversary walks `budget` consecutive candidate
// randomness values r' and looks for any in-range value v' < 2^n with
// g^v' h^r' = C. Each candidate is one multiplication by h^-1 and a table
// lookup.

struct ContrastResult {
  std::uint64_t candidates = 0;
  std::uint64_t openings_found = 0;  // excluding the honest one
  bool honest_found = false;         // positive control: the window contains r
  double expected_hits = 0;          // budget * 2^n / q for a random window
};

inline ContrastResult pedersen_substitution(const Group& grp, std::uint64_t q1, unsigned n_bits, std::uint64_t budget,
                                            Rng& rng) {
  enforce(n_bits >= 1 && n_bits <= 24, Errc::invalid_argument, "table width must be 1..24 bits");
  enforce(q1 < (1ULL << n_bits), Errc::invalid_argument, "q1 must fit the range");
  const Opening honest{grp.scalar(mpz_class(static_cast<unsigned long>(q1))), grp.random_scalar(rng)};
  const Commitment c = commit(grp, honest);

  std::unordered_map<std::string, std::uint64_t> table;
  GroupElement gv = grp.identity();
  for (std::uint64_t v = 0; v < (1ULL << n_bits); ++v) {
    table.emplace(gv.value().get_str(16), v);
    gv = grp.mul(gv, grp.g());
  }

  ContrastResult res;
  res.candidates = budget;
  res.expected_hits = static_cast<double>(budget) * std::ldexp(1.0, static_cast<int>(n_bits)) /
                      grp.q().get_d();
  // Start the window so that it straddles the honest randomness.
  Scalar start = grp.sub(honest.randomness, grp.scalar(mpz_class(static_cast<unsigned long>(budget / 2))));
  Scalar r = start;
  GroupElement cur = grp.div(c.point, grp.pow_h(start));  // C h^-r'
  const GroupElement h_inv = grp.inv(grp.h());
  for (std::uint64_t i = 0; i < budget; ++i) {
    auto it = table.find(cur.value().get_str(16));
    if (it != table.end()) {
      if (r == honest.randomness && it->second == q1)
        res.honest_found = true;
      else
        ++res.openings_found;
    }
    cur = grp.mul(cur, h_inv);
    r = grp.add(r, grp.scalar(1L));
  }
  return res;
}

}  // namespace rcbdc::attack
