#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "rcbdc/tx.hpp"

namespace rcbdc::bench {

struct BenchRow {
  std::string operation;
  std::size_t size = 0;  // m + n
  double mean_ns = 0;
};

namespace detail {

template <class F>
double time_ns(std::size_t reps, F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < reps; ++i) f();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::nano>(t1 - t0).count() / static_cast<double>(reps);
}

struct Fixture {
  std::vector<Opening> in, out;
  std::vector<Commitment> c_in, c_out;
  ConcealedTx tx;
};

// m inputs and n outputs that balance, with all commitments and the balance
// signature in place. Range proofs are left out on purpose.
inline Fixture make_fixture(const Group& grp, std::size_t m, std::size_t n, Rng& rng) {
  Fixture f;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    f.in.push_back(make_opening(grp, 100 + i, rng));
    total += 100 + i;
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    f.out.push_back(make_opening(grp, 1, rng));
    total -= 1;
  }
  f.out.push_back(make_opening(grp, total, rng));
  for (const auto& o : f.in) f.c_in.push_back(commit(grp, o));
  for (const auto& o : f.out) f.c_out.push_back(commit(grp, o));
  for (const auto& c : f.c_in) f.tx.inputs.push_back({{}, c});
  for (const auto& c : f.c_out) f.tx.outputs.push_back({c, grp.g()});
  return f;
}

}  // namespace detail

// Bank side: commit every input and output, derive alpha, sign under beta.
inline double bank_build_ns(const Group& grp, std::size_t m, std::size_t n, std::size_t reps, Rng& rng) {
  auto f = detail::make_fixture(grp, m, n, rng);
  auto msg = signed_message(grp, f.tx);
  return detail::time_ns(reps, [&] {
    std::vector<Scalar> in_r, out_r;
    for (const auto& o : f.in) {
      (void)commit(grp, o);
      in_r.push_back(o.randomness);
    }
    for (const auto& o : f.out) {
      (void)commit(grp, o);
      out_r.push_back(o.randomness);
    }
    auto bal = balance_key(grp, in_r, out_r);
    if (bal) (void)sign(grp, *bal, SigDomain::balance, ByteView(msg), rng);
  });
}

// Central bank: z = prod C / prod C', then one signature check under z.
inline double central_verify_ns(const Group& grp, std::size_t m, std::size_t n, std::size_t reps, Rng& rng) {
  auto f = detail::make_fixture(grp, m, n, rng);
  auto msg = signed_message(grp, f.tx);
  std::vector<Scalar> in_r, out_r;
  for (const auto& o : f.in) in_r.push_back(o.randomness);
  for (const auto& o : f.out) out_r.push_back(o.randomness);
  auto bal = balance_key(grp, in_r, out_r);
  enforce(bal.has_value(), Errc::invalid_argument, "degenerate fixture");
  Signature sig = sign(grp, *bal, SigDomain::balance, ByteView(msg), rng);
  bool ok = true;
  double ns = detail::time_ns(reps, [&] {
    auto z = combine(grp, f.c_in, f.c_out);
    ok &= verify(grp, grp.h(), z, SigDomain::balance, ByteView(msg), sig);
  });
  enforce(ok, Errc::invalid_argument, "benchmark fixture failed to verify");
  return ns;
}

// One exponentiation of a non-table base by a full-width exponent.
inline double exponentiation_ns(const Group& grp, std::size_t reps, Rng& rng) {
  GroupElement base = grp.pow_g(grp.random_scalar(rng));
  Scalar e = grp.random_scalar(rng);
  return detail::time_ns(reps, [&] { (void)grp.pow(base, e); });
}

// One commitment g^x h^r.
inline double commitment_ns(const Group& grp, std::size_t reps, Rng& rng) {
  Opening o = make_opening(grp, 12345, rng);
  return detail::time_ns(reps, [&] { (void)commit(grp, o); });
}

// Sizes are m + n with m = n (rounded up on the input side).
inline std::vector<BenchRow> overhead_sweep(const Group& grp, const std::vector<std::size_t>& sizes, std::size_t reps,
                                            Rng& rng) {
  std::vector<BenchRow> rows;
  for (std::size_t s : sizes) {
    enforce(s >= 2, Errc::invalid_argument, "m + n must be at least 2");
    std::size_t m = (s + 1) / 2, n = s - m;
    rows.push_back({"bank_build", s, bank_build_ns(grp, m, n, reps, rng)});
    rows.push_back({"central_verify", s, central_verify_ns(grp, m, n, reps, rng)});
  }
  return rows;
}

inline std::string to_csv(const std::vector<BenchRow>& rows) {
  std::string s = "operation,size,mean_ns\n";
  for (const auto& r : rows) s += r.operation + "," + std::to_string(r.size) + "," + std::to_string(r.mean_ns) + "\n";
  return s;
}

}  // namespace rcbdc::bench
