#pragma once

#include <gtest/gtest.h>

#include "rcbdc/rcbdc.hpp"

namespace rcbdc::test {

inline const Group& toy() {
  static const Group g(toy_params());
  return g;
}

inline const Group& test_group() {
  static const Group g(test_profile_params());
  return g;
}

inline Scalar s(const Group& grp, long v) { return grp.scalar(v); }
inline GroupElement e(const Group& grp, long v) { return grp.element(mpz_class(v)); }
inline Opening op(const Group& grp, long x, long r) { return {grp.scalar(x), grp.scalar(r)}; }

// Expects `f` to throw rcbdc::Error with the given code.
template <class F>
void expect_errc(Errc code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << errc_name(code) << ", nothing thrown";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), code) << err.what();
  }
}

// Pearson chi-square statistic for observed counts against a uniform law.
inline double chi_square_uniform(const std::vector<std::size_t>& counts) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  double expect = total / static_cast<double>(counts.size());
  double x2 = 0;
  for (auto c : counts) x2 += (c - expect) * (c - expect) / expect;
  return x2;
}

// Owned coin: what a wallet needs to spend it.
struct Coin {
  UtxoRecord rec;
  Opening opening;
  SchnorrKeyPair owner;

  SpendOpening spend() const { return {{rec.utxo_id, rec.owner}, opening}; }
};

// Mint one coin per (value, key) and hand back the spendable coins.
inline std::vector<Coin> mint_coins(const Group& grp, LedgerState& state, const std::vector<std::uint64_t>& values,
                                    const std::vector<SchnorrKeyPair>& keys, unsigned range_bits, Rng& rng) {
  std::vector<Payout> payouts;
  for (std::size_t i = 0; i < values.size(); ++i) payouts.push_back({values[i], keys[i].public_key});
  auto mint = mint_genesis(grp, payouts, range_bits, rng);
  state = std::move(mint.state);
  TxId id = tx_id(grp, state.log.front().tx);
  std::vector<Coin> coins;
  for (std::uint32_t i = 0; i < values.size(); ++i)
    coins.push_back({*state.find(utxo_id_for(id, i)), mint.openings.outputs[i].second, keys[i]});
  return coins;
}

}  // namespace rcbdc::test
