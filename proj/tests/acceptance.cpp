// Acceptance run: one PASS/FAIL line per criterion 1..11.
//
// Exit status is 0 when the set of failing criteria is exactly kBlocked
// (criteria that cannot hold as stated, analysed in the README) and
// nonzero otherwise, including when a blocked criterion unexpectedly passes.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "rcbdc/rcbdc.hpp"

using namespace rcbdc;

namespace {

// ---- pinned tolerances ----
constexpr std::size_t kBalanceTrials = 10000;
constexpr unsigned kProdRangeBits = 2;
constexpr unsigned kTestRangeBits = 16;
constexpr std::size_t kRandomScripts = 1000;
constexpr std::size_t kMaxLeaves = 1024;
constexpr double kMomentTol = 0.05;
constexpr double kTailTol = 1e-9;
constexpr double kQuantileLo = 29.0, kQuantileHi = 34.0;
constexpr double kKsMax = 0.01;
constexpr std::size_t kKsTrials = 100000;
constexpr double kR2Min = 0.99, kSlopeTol = 0.05;
constexpr std::size_t kLinearTrials = 10000;
constexpr double kForgeryTol = 0.005;
constexpr std::uint64_t kForgeryTrials = 1000000;
constexpr double kShapeLo = 0.5, kShapeHi = 2.0;  // measured / model cost ratio
constexpr double kShapeR2Min = 0.95;

const std::set<int> kBlocked{2, 7};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

const Group& toy() {
  static const Group g(toy_params());
  return g;
}
const Group& test_group() {
  static const Group g(test_profile_params());
  return g;
}
const Group& prod() {
  static const Group g(prod_profile_params());
  return g;
}

// ---- 1: balance proofs ----

// Runs `trials` balanced and `trials` unbalanced transactions; returns
// {balanced fully accepted, unbalanced with balance_ok false}.
std::pair<std::size_t, std::size_t> balance_run(const Group& grp, unsigned n_bits, std::size_t trials, Rng& rng) {
  const std::uint64_t top = std::uint64_t{1} << n_bits;
  std::size_t good = 0, caught = 0;
  for (std::size_t t = 0; t < 2 * trials; ++t) {
    const bool balanced = t < trials;
    auto payer = keygen(grp, grp.g(), rng);
    UtxoMapView view;
    std::vector<SpendOpening> spends;
    std::uint64_t total = 0;
    std::size_t m = 1 + rng.below(std::uint64_t{2});
    for (std::size_t i = 0; i < m; ++i) {
      std::uint64_t v = rng.below(top / 2);
      total += v;
      Opening o = make_opening(grp, v, rng);
      UtxoRecord rec;
      rng.fill(rec.utxo_id.data(), rec.utxo_id.size());
      rec.commitment = commit(grp, o);
      rec.owner = payer.public_key;
      view.add(rec);
      spends.push_back({{rec.utxo_id, rec.owner}, o});
    }
    std::vector<OwnedOutput> outs;
    std::uint64_t first = rng.below(total + 1);
    auto payee = keygen(grp, grp.g(), rng).public_key;
    outs.push_back({{first, payee}, make_opening(grp, first, rng)});
    if (total - first > 0 || rng.below(std::uint64_t{2}))
      outs.push_back({{total - first, payer.public_key}, make_opening(grp, total - first, rng)});
    if (!balanced) {
      // shift one output by a nonzero delta that stays in range
      auto& o = outs.back();
      std::uint64_t v = o.payout.value;
      std::uint64_t nv = v + 1 + rng.below(top - 1);
      nv %= top;
      if (nv == v) nv = (v + 1) % top;
      o.payout.value = nv;
      o.opening = make_opening(grp, nv, rng);
    }
    auto built = detail::assemble_tx(grp, spends, outs, n_bits, rng);
    built.tx.payer_sigs.push_back(payer_sign(grp, built.tx, payer, rng));
    auto rep = central_verify(view, grp, built.tx, n_bits);
    if (balanced && rep.accepted()) ++good;
    if (!balanced && !rep.balance_ok && rep.payer_sig_ok && rep.range_ok) ++caught;
  }
  return {good, caught};
}

Outcome criterion1() {
  // worked vector: commit(10,4) -> commit(6,1), commit(4,2); z = beta = 8
  const auto& t = toy();
  Rng rng("acceptance-1");
  auto payer = keypair_from_secret(t, t.g(), t.scalar(3L));
  Opening in{t.scalar(10L), t.scalar(4L)};
  UtxoMapView view;
  UtxoRecord rec;
  rec.utxo_id = sha256("worked");
  rec.commitment = commit(t, in);
  rec.owner = payer.public_key;
  view.add(rec);
  std::vector<OwnedOutput> outs{{{6, payer.public_key}, {t.scalar(6L), t.scalar(1L)}},
                                {{4, payer.public_key}, {t.scalar(4L), t.scalar(2L)}}};
  auto built = detail::assemble_tx(t, {{{rec.utxo_id, rec.owner}, in}}, outs, 3, rng);
  built.tx.payer_sigs.push_back(payer_sign(t, built.tx, payer, rng));
  auto rep = central_verify(view, t, built.tx, 3);
  std::vector<Scalar> r_in{t.scalar(4L)}, r_out{t.scalar(1L), t.scalar(2L)};
  bool vector_ok = rep.accepted() && rep.z.value() == 8 && balance_key(t, r_in, r_out)->public_key.value() == 8;

  auto t0 = std::chrono::steady_clock::now();
  auto [tg, tc] = balance_run(test_group(), kTestRangeBits, kBalanceTrials, rng);
  double test_s = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  auto [pg, pc] = balance_run(prod(), kProdRangeBits, kBalanceTrials, rng);
  double prod_s = seconds_since(t0);

  Outcome o;
  o.pass = vector_ok && tg == kBalanceTrials && tc == kBalanceTrials && pg == kBalanceTrials && pc == kBalanceTrials;
  o.detail = "z=" + rep.z.value().get_str() + " prod(2048-bit): balanced " + std::to_string(pg) + "/" +
             std::to_string(kBalanceTrials) + " unbalanced-caught " + std::to_string(pc) + "/" +
             std::to_string(kBalanceTrials) + " in " + fmt(prod_s, 4) + "s; test: " + std::to_string(tg) + "/" +
             std::to_string(tc) + " in " + fmt(test_s, 3) + "s";
  return o;
}

// ---- 2: range proofs ----

Outcome criterion2() {
  Rng rng("acceptance-2");
  bool complete = true;
  const auto& tg = test_group();
  for (std::uint64_t v = 0; v < 256; ++v) {
    auto o = make_opening(tg, v, rng);
    complete &= verify_range(tg, commit(tg, o), prove_range(tg, o, 8, rng), 8);
  }
  const auto& t = toy();
  for (long v = 0; v < 8; ++v)
    for (long r = 0; r < 11; ++r) {
      Opening o{t.scalar(v), t.scalar(r)};
      complete &= verify_range(t, commit(t, o), prove_range(t, o, 3, rng), 3);
    }

  // q-1 and 2^n: the prover refuses, and proofs of nearby in-range openings
  // with the same randomness do not transfer.
  bool rejects = true;
  auto refuses = [&](const Opening& o, unsigned n) {
    try {
      prove_range(tg, o, n, rng);
      return false;
    } catch (const Error& e) {
      return e.code() == Errc::value_out_of_range;
    }
  };
  for (int i = 0; i < 100; ++i) {
    Opening neg{tg.scalar(-1L), tg.random_scalar(rng)};
    Opening big{tg.scalar(1L << 8), neg.randomness};
    rejects &= refuses(neg, 8) && refuses(big, 8);
    for (long v : {0L, 255L}) {
      auto p = prove_range(tg, Opening{tg.scalar(v), neg.randomness}, 8, rng);
      rejects &= !verify_range(tg, commit(tg, neg), p, 8) && !verify_range(tg, commit(tg, big), p, 8);
    }
    auto wide = prove_range(tg, big, 9, rng);
    rejects &= verify_range(tg, commit(tg, big), wide, 9) && !verify_range(tg, commit(tg, big), wide, 8);
  }

  // Exhaustive p = 23, n = 3: every out-of-range opening (v in 8..10, any r),
  // every bit-commitment triple whose weighted product is the commitment,
  // with per-bit OR proofs built from the discrete logs of the triple.
  std::map<GroupElement, long> log_h;
  for (long x = 0; x < 11; ++x) log_h[t.pow_h(t.scalar(x))] = x;
  std::vector<GroupElement> elems;
  for (long x = 0; x < 11; ++x) elems.push_back(t.pow_g(t.scalar(x)));
  std::size_t openings = 0, with_accepting = 0, accepting = 0, triples = 0;
  for (long v = 8; v < 11; ++v)
    for (long r = 0; r < 11; ++r) {
      ++openings;
      Commitment c = commit(t, Opening{t.scalar(v), t.scalar(r)});
      std::size_t here = 0;
      for (const auto& d0 : elems)
        for (const auto& d1 : elems)
          for (const auto& d2 : elems) {
            if (t.mul(t.mul(d0, t.pow(d1, t.scalar(2L))), t.pow(d2, t.scalar(4L))) != c.point) continue;
            ++triples;
            RangeProof p;
            const GroupElement ds[3] = {d0, d1, d2};
            for (std::uint32_t i = 0; i < 3; ++i) {
              p.bit_commitments.push_back({ds[i]});
              p.or_proofs.push_back(detail::prove_bit(t, c, i, {ds[i]}, 0, t.scalar(log_h.at(ds[i])), rng));
            }
            if (verify_range(t, c, p, 3)) ++here;
          }
      accepting += here;
      with_accepting += here > 0;
    }

  Outcome o;
  o.pass = complete && rejects && with_accepting == 0;
  o.detail = std::string("completeness ") + (complete ? "ok" : "BROKEN") + ", q-1/2^n " + (rejects ? "rejected" : "ACCEPTED") +
             "; exhaustive p=23 n=3: " + std::to_string(with_accepting) + "/" + std::to_string(openings) +
             " out-of-range openings have accepting proofs (" + std::to_string(accepting) + " of " +
             std::to_string(triples) + " triples; order-11 group, every commitment also opens in range)";
  return o;
}

// ---- 3 and 11: scripted scenarios ----

struct ScriptStats {
  std::size_t scripts = 0, failed_scripts = 0;
  std::size_t honest = 0, confirmed = 0;
  std::size_t misbehaving = 0, false_accepts = 0;
  std::size_t double_spends = 0;
  std::size_t frames_to_cb = 0, leaks = 0;
};

// Random script with a running model of every balance, so each PAY is
// feasible and its outcome is known in advance.
std::string random_script(Rng& rng, std::size_t& honest, std::size_t& bad, std::size_t& doubles) {
  const std::vector<std::string> names{"u0", "u1", "u2", "u3"};
  std::map<std::string, std::uint64_t> bal;
  std::set<std::string> has_spent;
  std::ostringstream s;
  for (const auto& n : names) {
    bal[n] = 5 + rng.below(std::uint64_t{46});
    s << "MINT " << n << ' ' << bal[n] << '\n';
  }
  auto pick_other = [&](const std::string& a) {
    std::string b;
    do b = names[rng.below(names.size())]; while (b == a);
    return b;
  };
  std::size_t steps = 4 + rng.below(std::uint64_t{5});
  for (std::size_t i = 0; i < steps; ++i) {
    std::vector<std::string> funded;
    for (const auto& n : names)
      if (bal[n] > 0) funded.push_back(n);
    const auto& a = funded[rng.below(funded.size())];
    auto roll = rng.below(std::uint64_t{10});
    if (roll < 2 && funded.size() >= 2) {
      // two payers in one batch
      std::string a2;
      do a2 = funded[rng.below(funded.size())]; while (a2 == a);
      std::uint64_t x = 1 + rng.below(bal[a]), y = 1 + rng.below(bal[a2]);
      std::string b = pick_other(a), b2 = pick_other(a2);
      s << "BATCH BEGIN\nPAY " << a << ' ' << b << ' ' << x << "\nPAY " << a2 << ' ' << b2 << ' ' << y
        << "\nBATCH END\nEXPECT-CONFIRM\n";
      bal[a] -= x, bal[b] += x, bal[a2] -= y, bal[b2] += y;
      has_spent.insert(a), has_spent.insert(a2);
      ++honest;
      continue;
    }
    std::string b = pick_other(a);
    std::uint64_t x = 1 + rng.below(bal[a]);
    if (roll < 5) {
      s << "PAY " << a << ' ' << b << ' ' << x << "\nEXPECT-CONFIRM\n";
      bal[a] -= x, bal[b] += x;
      has_spent.insert(a);
      ++honest;
      if (rng.below(std::uint64_t{3}) == 0) {
        s << "REPLAY\nEXPECT-REJECT unknown-input\n";
        ++doubles;
      }
    } else if (roll < 7) {
      s << "PAY " << a << ' ' << b << ' ' << x << " drop-sig\nEXPECT-REJECT verify-failed\n";
      ++bad;
    } else if (roll < 9 || has_spent.empty()) {
      s << "PAY " << a << ' ' << b << ' ' << x << " forge-sig\nEXPECT-REJECT verify-failed\n";
      ++bad;
    } else {
      auto it = has_spent.begin();
      std::advance(it, static_cast<long>(rng.below(has_spent.size())));
      s << "PAY " << *it << ' ' << pick_other(*it) << " 1 stale\nEXPECT-REJECT unknown-input\n";
      ++doubles;
    }
  }
  for (const auto& n : names) s << "EXPECT-BALANCE " << n << ' ' << bal[n] << '\n';
  return s.str();
}

const ScriptStats& script_stats() {
  static const ScriptStats stats = [] {
    ScriptStats st;
    const auto& grp = test_group();
    auto tally = [&](const scenario::Transcript& t, const std::string& script) {
      ++st.scripts;
      if (!t.all_expectations_met() && st.failed_scripts++ < 3) {
        std::cerr << "--- unmet expectations in:\n" << script;
        for (const auto& f : t.failures) std::cerr << "  " << f << "\n";
      }
      for (const auto& v : t.verifications) st.confirmed += v.confirmed;
      auto b = scenario::scan_boundary(grp, t);
      st.frames_to_cb += b.frames_to_central_bank;
      st.leaks += b.opening_bearing_frames + b.opening_matches;
    };
    for (const auto& ent : std::filesystem::directory_iterator(RCBDC_SCENARIO_DIR)) {
      if (ent.path().extension() != ".txt") continue;
      std::ifstream in(ent.path());
      std::ostringstream os;
      os << in.rdbuf();
      auto t = scenario::run_scenario(grp, {1, 0, 0.0}, os.str());
      tally(t, os.str());
    }
    std::size_t fixed_confirmed = st.confirmed;
    Rng rng("acceptance-scripts");
    for (std::size_t i = 0; i < kRandomScripts; ++i) {
      std::size_t honest = 0, bad = 0, doubles = 0;
      auto script = random_script(rng, honest, bad, doubles);
      std::size_t before = st.confirmed;
      auto t = scenario::run_scenario(grp, {i + 100, 0, (i % 4 == 0) ? 0.3 : 0.0}, script);
      tally(t, script);
      std::size_t got = st.confirmed - before;
      st.honest += honest;
      st.misbehaving += bad;
      st.double_spends += doubles;
      if (got > honest) st.false_accepts += got - honest;
    }
    st.confirmed -= fixed_confirmed;
    return st;
  }();
  return stats;
}

Outcome criterion3() {
  const auto& st = script_stats();
  Outcome o;
  o.pass = st.failed_scripts == 0 && st.false_accepts == 0 && st.confirmed == st.honest && st.misbehaving > 0 &&
           st.double_spends > 0;
  o.detail = std::to_string(st.scripts) + " scripts, " + std::to_string(st.failed_scripts) + " with unmet expectations; " +
             std::to_string(st.double_spends) + " double spends and " + std::to_string(st.misbehaving) +
             " missing/forged signatures, " + std::to_string(st.false_accepts) + " false accepts; honest confirmed " +
             std::to_string(st.confirmed) + "/" + std::to_string(st.honest);
  return o;
}

Outcome criterion11() {
  const auto& st = script_stats();
  Outcome o;
  o.pass = st.leaks == 0 && st.frames_to_cb > 0;
  o.detail = std::to_string(st.frames_to_cb) + " frames to the central bank over " + std::to_string(st.scripts) +
             " scripts, " + std::to_string(st.leaks) + " carrying non-genesis openings";
  return o;
}

// ---- 4: merkle confirmations ----

Bytes encode_receipt(const Group& grp, const OutputRecord& out, const Opening& op, const MerklePath& path,
                     const ConfirmationRecord& conf) {
  ByteWriter w;
  write(grp, w, out.commitment);
  grp.write(w, out.owner);
  write(grp, w, op);
  write(w, path);
  write(grp, w, conf);
  return std::move(w).take();
}

bool check_receipt(const Group& grp, const GroupElement& cb, ByteView bytes) {
  try {
    ByteReader r(bytes);
    OutputRecord out;
    out.commitment = read_commitment(grp, r);
    out.owner = grp.read_element(r);
    Opening op = read_opening(grp, r);
    MerklePath path = read_merkle_path(r);
    ConfirmationRecord conf = read_confirmation(grp, r);
    r.expect_done();
    return verify_confirmation(grp, cb, out, op, path, conf);
  } catch (const Error&) {
    return false;
  }
}

Outcome criterion4() {
  const auto& grp = test_group();
  Rng rng("acceptance-4");
  std::vector<std::size_t> sizes{1, 2, 3, 5, 8, 9, 64, 255, 256, 257, 1000, kMaxLeaves};
  for (int i = 0; i < 8; ++i) sizes.push_back(1 + rng.below(std::uint64_t{kMaxLeaves}));
  std::size_t outputs = 0, verified = 0, tampers = 0, tamper_accepts = 0;
  auto owner = keygen(grp, grp.g(), rng).public_key;
  for (std::size_t n : sizes) {
    std::vector<Payout> payouts;
    for (std::size_t j = 0; j < n; ++j) payouts.push_back({rng.below(std::uint64_t{1000}), owner});
    auto mint = mint_genesis(grp, payouts, kTestRangeBits, rng);
    const auto& entry = mint.state.log.front();
    auto paths = confirmation_paths(grp, entry.tx);
    for (std::uint32_t j = 0; j < n; ++j) {
      ++outputs;
      auto bytes = encode_receipt(grp, entry.tx.outputs[j], mint.openings.outputs[j].second, paths[j], entry.confirmation);
      verified += check_receipt(grp, mint.state.cb_key.public_key, ByteView(bytes));
      // every byte for small trees, a random byte otherwise
      std::vector<std::size_t> where;
      if (n <= 9)
        for (std::size_t k = 0; k < bytes.size(); ++k) where.push_back(k);
      else
        where.push_back(rng.below(bytes.size()));
      for (std::size_t k : where) {
        auto bad = bytes;
        bad[k] ^= static_cast<std::uint8_t>(1 + rng.below(std::uint64_t{255}));
        ++tampers;
        tamper_accepts += check_receipt(grp, mint.state.cb_key.public_key, ByteView(bad));
      }
    }
  }
  Outcome o;
  o.pass = verified == outputs && tamper_accepts == 0;
  o.detail = std::to_string(verified) + "/" + std::to_string(outputs) + " receipts verify over " +
             std::to_string(sizes.size()) + " trees (max " + std::to_string(kMaxLeaves) + " leaves); " +
             std::to_string(tamper_accepts) + "/" + std::to_string(tampers) + " single-byte tampers accepted";
  return o;
}

// ---- 5-8: anonymity model ----

Outcome criterion5() {
  auto counts = anon::simulate_window_counts(100.0, 1.0, 10000, 5);
  double m = 0, v = 0;
  for (auto c : counts) m += static_cast<double>(c);
  m /= static_cast<double>(counts.size());
  for (auto c : counts) v += (static_cast<double>(c) - m) * (static_cast<double>(c) - m);
  v /= static_cast<double>(counts.size() - 1);
  Outcome o;
  o.pass = std::fabs(m - 100) <= kMomentTol * 100 && std::fabs(v - 100) <= kMomentTol * 100;
  o.detail = "mean " + fmt(m) + " var " + fmt(v) + " (target 100 +/- 5%)";
  return o;
}

Outcome criterion6() {
  using big = boost::multiprecision::cpp_bin_float_50;
  big mu = 100, term = exp(-mu), below = 0;
  for (int i = 0; i < 80; ++i) {
    below += term;
    term = term * mu / (i + 1);
  }
  double oracle = static_cast<double>(big(1) - below);
  double got = anon::prob_at_least(100.0, 1.0, 80);
  auto k = anon::achieved_k(100.0, 1.0);
  Outcome o;
  o.pass = std::fabs(got - oracle) <= kTailTol && k == 80;
  o.detail = "Pr[K>=80] = " + fmt(got, 16) + " oracle " + fmt(oracle, 16) + ", achieved_k = " + std::to_string(k);
  return o;
}

Outcome criterion7() {
  double z = anon::waiting_quantile(1.0, 20, 0.999);
  auto sim = anon::simulate_waiting(1.0, 20, kKsTrials, 7, {20});
  double ks = anon::ks_statistic(sim.samples.at(20), [](double x) { return anon::waiting_cdf(1.0, 20, x); });
  bool in_bracket = z >= kQuantileLo && z <= kQuantileHi;
  Outcome o;
  o.pass = in_bracket && ks < kKsMax;
  o.detail = "quantile(0.999, k=20) = " + fmt(z, 8) + (in_bracket ? " in" : " outside") + " [29, 34]; KS = " + fmt(ks, 4) +
             (ks < kKsMax ? " < 0.01" : " >= 0.01");
  return o;
}

Outcome criterion8() {
  bool ok = true;
  std::string detail;
  for (double lambda : {0.5, 1.0, 5.0}) {
    auto sim = anon::simulate_waiting(lambda, 100, kLinearTrials, 8);
    std::vector<double> x, y;
    for (const auto& row : sim.per_k)
      if (row.k >= 2) x.push_back(static_cast<double>(row.k)), y.push_back(row.mean_wait);
    auto fit = anon::least_squares(x, y);
    bool good = fit.r_squared >= kR2Min && std::fabs(fit.slope * lambda - 1) <= kSlopeTol;
    ok &= good;
    detail += "lambda=" + fmt(lambda, 2) + ": slope " + fmt(fit.slope, 5) + " (1/lambda " + fmt(1 / lambda, 3) +
              ") R2 " + fmt(fit.r_squared, 6) + "; ";
  }
  return {ok, detail};
}

// ---- 9: toy cipher substitution ----

Outcome criterion9() {
  attack::ToyCipherConfig c{16, 0};
  double theory = attack::theoretical_rate(c, 1000);
  double rate = attack::forgery_trial(c, 1000, kForgeryTrials, 9).rate();
  // exhaustive: every substitute key against a fixed ciphertext
  auto ex = attack::exhaustive_rate(c, 1000, attack::encrypt(c, 123456789, 1000));
  bool formula = std::fabs(theory - (65536.0 - 1001.0) / 65536.0) < 1e-15;
  bool mono = true;
  double prev = 2, prev_t = 2;
  std::string sweep;
  for (std::uint64_t q1 : {std::uint64_t{0}, std::uint64_t{1} << 14, std::uint64_t{1} << 15, std::uint64_t{3} << 14,
                           (std::uint64_t{1} << 16) - 1}) {
    double r = attack::forgery_trial(c, q1, 100000, 90 + q1).rate(), th = attack::theoretical_rate(c, q1);
    mono &= r <= prev && th <= prev_t;
    prev = r, prev_t = th;
    sweep += fmt(r, 4) + " ";
  }
  Outcome o;
  o.pass = formula && std::fabs(rate - theory) <= kForgeryTol && std::fabs(ex.rate() - theory) <= kForgeryTol && mono;
  o.detail = "rate " + fmt(rate, 6) + " vs " + fmt(theory, 6) + ", exhaustive " + fmt(ex.rate(), 6) + ", sweep " + sweep +
             (mono ? "non-increasing" : "NOT monotone");
  return o;
}

// ---- 10: cost shape ----

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Outcome criterion10() {
  const auto& grp = prod();
  Rng rng("acceptance-10");
  const std::vector<std::size_t> sizes{2, 4, 8, 16, 32, 64};
  std::vector<double> x, build, verify_t;
  for (std::size_t s : sizes) {
    std::size_t m = (s + 1) / 2, n = s - m;
    std::vector<double> b, v;
    for (int i = 0; i < 3; ++i) {
      b.push_back(bench::bank_build_ns(grp, m, n, 3, rng));
      v.push_back(bench::central_verify_ns(grp, m, n, 5, rng));
    }
    x.push_back(static_cast<double>(s));
    build.push_back(median_of(b));
    verify_t.push_back(median_of(v));
  }
  // model costs measured directly: a commitment is g^x h^r, the verify
  // floor is g^s z^e with z a fresh element
  std::vector<double> cm, two;
  GroupElement z = grp.pow_g(grp.random_scalar(rng));
  for (int i = 0; i < 3; ++i) {
    cm.push_back(bench::commitment_ns(grp, 50, rng));
    Scalar s1 = grp.random_scalar(rng), e1 = grp.random_scalar(rng);
    two.push_back(bench::detail::time_ns(50, [&] { (void)grp.mul(grp.pow_g(s1), grp.pow(z, e1)); }));
  }
  double commit_cost = median_of(cm), floor_cost = median_of(two);

  auto fb = anon::least_squares(x, build);
  auto fv = anon::least_squares(x, verify_t);
  double build_ratio = fb.slope / commit_cost;
  double floor_ratio = fv.intercept / floor_cost;
  // at most linear: the verify slope is a multiplication per element, far
  // below an exponentiation; growth across the sweep stays under the floor
  bool build_ok = fb.r_squared >= kShapeR2Min && build_ratio >= kShapeLo && build_ratio <= kShapeHi;
  bool verify_ok = floor_ratio >= kShapeLo && floor_ratio <= kShapeHi && fv.slope * 64 <= fv.intercept &&
                   verify_t.back() <= kShapeHi * verify_t.front();
  Outcome o;
  o.pass = build_ok && verify_ok;
  o.detail = "build slope " + fmt(fb.slope / 1e3, 4) + "us/elem (commitment " + fmt(commit_cost / 1e3, 4) + "us, ratio " +
             fmt(build_ratio, 3) + ", R2 " + fmt(fb.r_squared, 4) + "); verify floor " + fmt(fv.intercept / 1e3, 4) +
             "us (g^s z^e " + fmt(floor_cost / 1e3, 4) + "us, ratio " + fmt(floor_ratio, 3) + "), slope " +
             fmt(fv.slope / 1e3, 4) + "us/elem";
  return o;
}

}  // namespace

// With arguments, runs only the listed criteria.
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},   {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11},
  };
  std::set<int> failed, blocked;
  for (const auto& [n, run] : criteria) {
    if (!only.empty() && !only.count(n)) continue;
    if (kBlocked.count(n)) blocked.insert(n);
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failed.insert(n);
    std::cout << "criterion " << std::setw(2) << n << ": " << (o.pass ? "PASS" : "FAIL")
              << (kBlocked.count(n) ? " (documented-blocked)" : "") << "  " << o.detail << "  [" << fmt(seconds_since(t0), 3)
              << "s]" << std::endl;
  }
  bool expected = failed == blocked;
  std::cout << "failing: {";
  for (int n : failed) std::cout << ' ' << n;
  std::cout << " }, documented-blocked: {";
  for (int n : blocked) std::cout << ' ' << n;
  std::cout << " } -> " << (expected ? "as documented" : "UNEXPECTED") << std::endl;
  return expected ? 0 : 1;
}
