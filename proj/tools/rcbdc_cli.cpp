#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rcbdc/rcbdc.hpp"

using namespace rcbdc;
using nlohmann::json;

namespace {

struct Globals {
  std::string params_path;
  std::string profile = "test";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
};

Bytes read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  enforce(f.good(), Errc::io_error, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(f), {});
}

void write_file(const std::string& path, ByteView data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  enforce(f.good(), Errc::io_error, "cannot write " + path);
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  enforce(f.good(), Errc::io_error, "short write to " + path);
}

void write_text(const std::string& path, const std::string& text) { write_file(path, as_bytes(text)); }

// Writes to --out if given, otherwise stdout.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) std::cout << text;
  else write_text(g.out, text);
}

json read_json(const std::string& path) {
  Bytes b = read_file(path);
  try {
    return json::parse(b.begin(), b.end());
  } catch (const json::exception& e) {
    fail(Errc::invalid_argument, path + ": " + e.what());
  }
}

Group load_group(const Globals& g) {
  if (!g.params_path.empty()) return Group(decode_params_file(read_file(g.params_path)));
  return Group(params_for_profile(g.profile));
}

Rng make_rng(const Globals& g) { return g.seed_set ? Rng(g.seed) : Rng::from_os(); }

std::string hex_of(const Group& grp, const GroupElement& e) { return to_hex(grp.encode(e)); }
std::string hex_of(const Group& grp, const Scalar& s) {
  ByteWriter w;
  grp.write(w, s);
  return to_hex(w.bytes());
}

GroupElement element_from_hex(const Group& grp, const std::string& hex) {
  Bytes b = from_hex(hex);
  ByteReader r(b, Errc::invalid_argument);
  auto e = grp.read_element(r);
  r.expect_done();
  return e;
}

Scalar scalar_from_hex(const Group& grp, const std::string& hex) {
  Bytes b = from_hex(hex);
  ByteReader r(b, Errc::invalid_argument);
  auto s = grp.read_scalar(r);
  r.expect_done();
  return s;
}

Digest digest_from_hex(const std::string& hex) {
  Bytes b = from_hex(hex);
  enforce(b.size() == 32, Errc::invalid_argument, "expected 32-byte hex id");
  Digest d{};
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

// "VALUE:PUBKEYHEX"
Payout parse_payout(const Group& grp, const std::string& s) {
  auto colon = s.find(':');
  enforce(colon != std::string::npos, Errc::invalid_argument, "payout must be VALUE:PUBKEY");
  std::uint64_t v = 0;
  try {
    v = std::stoull(s.substr(0, colon));
  } catch (const std::exception&) {
    fail(Errc::invalid_argument, "bad payout value in '" + s + "'");
  }
  return {v, element_from_hex(grp, s.substr(colon + 1))};
}

// ---- coin and confirmation files ----

json coin_json(const Group& grp, const UtxoId& id, const OutputRecord& rec, const Opening& o) {
  return {{"utxo_id", to_hex(id)},
          {"owner", hex_of(grp, rec.owner)},
          {"commitment", hex_of(grp, rec.commitment.point)},
          {"value", o.value.value().get_ui()},
          {"randomness", hex_of(grp, o.randomness)}};
}

struct CoinEntry {
  UtxoId id;
  GroupElement owner;
  Opening opening;
};

std::vector<CoinEntry> read_coins(const Group& grp, const std::string& path) {
  json j = read_json(path);
  std::vector<CoinEntry> out;
  try {
    for (const auto& c : j.at("coins"))
      out.push_back({digest_from_hex(c.at("utxo_id")), element_from_hex(grp, c.at("owner")),
                     {grp.scalar(mpz_class(static_cast<unsigned long>(c.at("value").get<std::uint64_t>()))),
                      scalar_from_hex(grp, c.at("randomness"))}});
  } catch (const json::exception& e) {
    fail(Errc::invalid_argument, path + ": " + e.what());
  }
  return out;
}

json confirmation_json(const Group& grp, const GroupElement& cb_pub, const ConcealedTx& tx,
                       const ConfirmationRecord& conf, const OpeningPacket& packet) {
  auto paths = confirmation_paths(grp, tx);
  json outs = json::array();
  for (std::uint32_t j = 0; j < tx.outputs.size(); ++j) {
    ByteWriter pw;
    write(pw, paths[j]);
    json o = {{"index", j}, {"record", to_hex(encode_output_record(grp, tx.outputs[j]))}, {"path", to_hex(pw.bytes())}};
    for (const auto& [pos, op] : packet.outputs)
      if (pos == j) o["coin"] = coin_json(grp, utxo_id_for(conf.tx_id, j), tx.outputs[j], op);
    outs.push_back(o);
  }
  ByteWriter cw;
  write(grp, cw, conf);
  return {{"cb_pubkey", hex_of(grp, cb_pub)}, {"confirmation", to_hex(cw.bytes())}, {"outputs", outs}};
}

// ---- keystores ----

struct Wallet {
  MasterSecret master;
  std::map<GroupElement, SchnorrKeyPair> keys;
};

Wallet open_wallet(const Group& grp, const std::string& path, const std::string& pass) {
  Wallet w{open_master(read_file(path), pass), {}};
  for (std::uint64_t i = 0; i < w.master.counter; ++i) {
    auto kp = derive_keypair(grp, w.master, i);
    w.keys.emplace(kp.public_key, kp);
  }
  return w;
}

LedgerState load_ledger(const Group& grp, const std::string& path) { return restore(grp, read_file(path)); }

// Builds, payer-signs and applies one transaction. Payers are given as
// keystores; each must own at least one spent coin.
int settle(const Globals& g, const std::string& ledger_path, const std::vector<CoinEntry>& spends,
           const std::vector<std::vector<Payout>>& payouts_per_payer, const std::vector<Wallet>& wallets,
           const std::vector<std::vector<CoinEntry>>& spends_per_payer) {
  Group grp = load_group(g);
  Rng rng = make_rng(g);
  LedgerState st = load_ledger(grp, ledger_path);

  ConcealedTx tx;
  OpeningPacket packet;
  if (payouts_per_payer.size() == 1) {
    std::vector<SpendOpening> so;
    for (const auto& c : spends) so.push_back({{c.id, c.owner}, c.opening});
    auto built = build_concealed_tx(grp, so, payouts_per_payer[0], st.range_bits, rng);
    tx = built.tx;
    packet = built.packet;
  } else {
    std::vector<TxComponent> comps;
    for (std::size_t i = 0; i < payouts_per_payer.size(); ++i) {
      std::vector<SpendOpening> so;
      for (const auto& c : spends_per_payer[i]) so.push_back({{c.id, c.owner}, c.opening});
      comps.push_back(make_component(grp, so.front().ref.owner, so, payouts_per_payer[i], st.range_bits, rng));
    }
    auto agg = aggregate(grp, comps, st.range_bits, rng);
    tx = agg.tx;
    for (const auto& pp : agg.packets)
      for (const auto& o : pp.packet.outputs) packet.outputs.push_back(o);
  }

  std::set<GroupElement> owners;
  for (const auto& in : tx.inputs) owners.insert(in.ref.owner);
  for (const auto& owner : owners) {
    const SchnorrKeyPair* kp = nullptr;
    for (const auto& w : wallets)
      if (auto it = w.keys.find(owner); it != w.keys.end()) kp = &it->second;
    enforce(kp != nullptr, Errc::invalid_argument, "no keystore holds the key for input owner " + hex_of(grp, owner));
    tx.payer_sigs.push_back(payer_sign(grp, tx, *kp, rng));
  }

  ApplyOutcome out = apply_tx(st, grp, tx, rng);
  if (auto* rej = std::get_if<Rejection>(&out)) {
    std::cerr << "rejected: " << reject_reason_name(rej->reason);
    if (rej->report)
      std::cerr << " (payer_sig=" << rej->report->payer_sig_ok << " range=" << rej->report->range_ok
                << " balance=" << rej->report->balance_ok << ")";
    std::cerr << "\n";
    return 3;
  }
  const auto& conf = std::get<ConfirmationRecord>(out);
  write_file(ledger_path, snapshot(st, grp));
  emit(g, confirmation_json(grp, st.cb_key.public_key, tx, conf, packet).dump(2) + "\n");
  std::cerr << "confirmed tx " << to_hex(conf.tx_id) << " anonymity=" << anonymity_of(tx) << "\n";
  return 0;
}

std::vector<CoinEntry> pick_coins(const std::vector<CoinEntry>& coins, const std::vector<std::string>& ids) {
  std::vector<CoinEntry> out;
  for (const auto& id : ids) {
    Digest d = digest_from_hex(id);
    auto it = std::find_if(coins.begin(), coins.end(), [&](const CoinEntry& c) { return c.id == d; });
    enforce(it != coins.end(), Errc::invalid_argument, "coin " + id + " not found in coin file");
    out.push_back(*it);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rcbdc: concealed-value retail CBDC toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--params", g.params_path, "group parameter file (overrides --profile)");
  app.add_option("--profile", g.profile, "built-in group: toy, test or prod")->check(CLI::IsMember({"toy", "test", "prod"}));
  auto* seed_opt = app.add_option("--seed", g.seed, "deterministic seed (default: OS entropy)");
  app.add_option("--out", g.out, "output file (default: stdout)");

  // params-gen
  auto* pg = app.add_subcommand("params-gen", "generate a prime-order subgroup and hashed second generator");
  std::size_t pbits = 2048;
  std::string pseed = "rcbdc-params";
  pg->add_option("--bits", pbits, "bit length of p")->check(CLI::Range(8, 8192));
  pg->add_option("--label", pseed, "generation seed label");

  // keygen
  auto* kg = app.add_subcommand("keygen", "create a keystore or derive its next pseudonym");
  std::string ks_path, passphrase, registry_path, identity;
  kg->add_option("--keystore", ks_path, "keystore file")->required();
  kg->add_option("--passphrase", passphrase, "keystore passphrase")->required();
  kg->add_option("--registry", registry_path, "bank registry file to append the key to");
  kg->add_option("--identity", identity, "identity label recorded in the registry");

  // mint
  auto* mt = app.add_subcommand("mint", "create a ledger with genesis outputs");
  std::string ledger_path;
  std::vector<std::string> payout_args;
  unsigned range_bits = 0;
  mt->add_option("--ledger", ledger_path, "ledger snapshot to create")->required();
  mt->add_option("--payout", payout_args, "VALUE:PUBKEY (repeatable)")->required();
  mt->add_option("--range-bits", range_bits, "range proof width (default: group default)");

  // pay
  auto* py = app.add_subcommand("pay", "build, sign and settle one payment");
  std::string coins_path;
  std::vector<std::string> spend_ids;
  py->add_option("--ledger", ledger_path, "ledger snapshot")->required();
  py->add_option("--coins", coins_path, "coin file with openings of the spent outputs")->required();
  py->add_option("--spend", spend_ids, "utxo id to spend (repeatable)")->required();
  py->add_option("--payout", payout_args, "VALUE:PUBKEY (repeatable)")->required();
  py->add_option("--keystore", ks_path, "payer keystore")->required();
  py->add_option("--passphrase", passphrase, "keystore passphrase")->required();

  // batch
  auto* bt = app.add_subcommand("batch", "aggregate several payments into one transaction");
  std::string requests_path;
  bt->add_option("--ledger", ledger_path, "ledger snapshot")->required();
  bt->add_option("--requests", requests_path,
                 "JSON: [{keystore, passphrase, coins, spend: [id], payouts: [\"V:PK\"]}]")->required();

  // verify-confirmation
  auto* vc = app.add_subcommand("verify-confirmation", "check a payee's confirmation receipt");
  std::string conf_path;
  std::uint32_t out_index = 0;
  vc->add_option("--confirmation", conf_path, "confirmation file written by pay or batch")->required();
  vc->add_option("--index", out_index, "output index");

  // simulate
  auto* sm = app.add_subcommand("simulate", "simulated waiting time to k-anonymity (CSV)");
  double lambda = 1.0;
  std::uint64_t k_max = 100;
  std::size_t trials = 100000;
  sm->add_option("--lambda", lambda, "arrival rate")->check(CLI::PositiveNumber);
  sm->add_option("--k-max", k_max, "largest k")->check(CLI::Range(1, 100000));
  sm->add_option("--trials", trials, "trials")->check(CLI::Range(1, 100000000));

  // model
  auto* md = app.add_subcommand("model", "analytic window-count tail and waiting-time quantiles (CSV)");
  double window = 100.0;
  double prob = 0.999;
  md->add_option("--lambda", lambda, "arrival rate")->check(CLI::PositiveNumber);
  md->add_option("--window", window, "window length T")->check(CLI::PositiveNumber);
  md->add_option("--k-max", k_max, "largest k")->check(CLI::Range(1, 100000));
  md->add_option("--prob", prob, "waiting-time quantile level")->check(CLI::Range(0.0, 1.0));

  // bench
  auto* bn = app.add_subcommand("bench", "bank build and central-bank verify cost vs m+n (CSV)");
  std::vector<std::size_t> sizes{2, 4, 8, 16, 32, 64};
  std::size_t reps = 20;
  bn->add_option("--sizes", sizes, "m+n values, comma separated")->delimiter(',');
  bn->add_option("--reps", reps, "repetitions per point")->check(CLI::Range(1, 1000000));

  // attack-demo
  auto* ad = app.add_subcommand("attack-demo", "counter-mode substitution forgery vs Pedersen binding");
  unsigned bits = 16;
  std::uint64_t q1 = 1000;
  std::uint64_t atk_trials = 1000000;
  ad->add_option("--bits", bits, "toy block width")->check(CLI::Range(8, 32));
  ad->add_option("--q1", q1, "honest amount");
  ad->add_option("--trials", atk_trials, "trials");

  // scenario
  auto* sc = app.add_subcommand("scenario", "run a protocol script over the in-process transport");
  std::string script_path;
  double latency = 1.0;
  sc->add_option("script", script_path, "script file")->required();
  sc->add_option("--latency", latency, "per-hop latency")->check(CLI::NonNegativeNumber);
  sc->add_option("--range-bits", range_bits, "range proof width (default: group default)");

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    if (*pg) {
      GroupParams p = generate_group_params(pbits, std::string_view(pseed));
      Group grp(p);
      if (g.out.empty()) {
        std::cout << "p=" << p.p.get_str(16) << "\nq=" << p.q.get_str(16) << "\ng=" << p.g.get_str(16)
                  << "\nh=" << p.h.get_str(16) << "\ndigest=" << to_hex(grp.digest()) << "\n";
      } else {
        write_file(g.out, encode_params_file(grp));
        std::cerr << "wrote " << g.out << " digest " << to_hex(grp.digest()) << "\n";
      }
      return 0;
    }

    if (*kg) {
      Group grp = load_group(g);
      Rng rng = make_rng(g);
      MasterSecret m = std::filesystem::exists(ks_path) ? open_master(read_file(ks_path), passphrase)
                                                        : MasterSecret::generate(rng);
      std::uint64_t idx = m.counter;
      auto kp = next_keypair(grp, m);
      write_file(ks_path, seal_master(m, passphrase, rng));
      if (!registry_path.empty()) {
        enforce(!identity.empty(), Errc::invalid_argument, "--identity is required with --registry");
        auto reg = std::filesystem::exists(registry_path)
                       ? registry_from_json(grp, read_json(registry_path))
                       : IdentityRegistry(grp, keygen(grp, grp.g(), rng).public_key);
        reg.register_key(kp.public_key, identity, idx);
        write_text(registry_path, registry_to_json(grp, reg).dump(2) + "\n");
      }
      emit(g, json{{"index", idx}, {"pubkey", hex_of(grp, kp.public_key)}}.dump() + "\n");
      return 0;
    }

    if (*mt) {
      Group grp = load_group(g);
      Rng rng = make_rng(g);
      std::vector<Payout> payouts;
      for (const auto& s : payout_args) payouts.push_back(parse_payout(grp, s));
      auto res = mint_genesis(grp, payouts, range_bits ? range_bits : default_range_bits(grp), rng);
      write_file(ledger_path, snapshot(res.state, grp));
      const auto& e = res.state.log.front();
      emit(g, confirmation_json(grp, res.state.cb_key.public_key, e.tx, e.confirmation, res.openings).dump(2) + "\n");
      return 0;
    }

    if (*py) {
      Group grp = load_group(g);
      auto coins = pick_coins(read_coins(grp, coins_path), spend_ids);
      std::vector<Payout> payouts;
      for (const auto& s : payout_args) payouts.push_back(parse_payout(grp, s));
      std::vector<Wallet> wallets{open_wallet(grp, ks_path, passphrase)};
      return settle(g, ledger_path, coins, {payouts}, wallets, {coins});
    }

    if (*bt) {
      Group grp = load_group(g);
      json reqs = read_json(requests_path);
      std::vector<Wallet> wallets;
      std::vector<std::vector<Payout>> payouts;
      std::vector<std::vector<CoinEntry>> spends;
      std::vector<CoinEntry> all;
      try {
        for (const auto& r : reqs) {
          wallets.push_back(open_wallet(grp, r.at("keystore"), r.at("passphrase")));
          spends.push_back(pick_coins(read_coins(grp, r.at("coins")), r.at("spend").get<std::vector<std::string>>()));
          all.insert(all.end(), spends.back().begin(), spends.back().end());
          payouts.emplace_back();
          for (const auto& s : r.at("payouts")) payouts.back().push_back(parse_payout(grp, s.get<std::string>()));
        }
      } catch (const json::exception& e) {
        fail(Errc::invalid_argument, requests_path + ": " + e.what());
      }
      enforce(!wallets.empty(), Errc::empty_batch, "no requests");
      return settle(g, ledger_path, all, payouts, wallets, spends);
    }

    if (*vc) {
      Group grp = load_group(g);
      json j = read_json(conf_path);
      bool ok = false;
      try {
        auto cb = element_from_hex(grp, j.at("cb_pubkey"));
        Bytes cb_bytes = from_hex(j.at("confirmation").get<std::string>());
        ByteReader cr(cb_bytes, Errc::invalid_argument);
        auto conf = read_confirmation(grp, cr);
        const json* entry = nullptr;
        for (const auto& o : j.at("outputs"))
          if (o.at("index").get<std::uint32_t>() == out_index) entry = &o;
        enforce(entry && entry->contains("coin"), Errc::invalid_argument, "no opening for that output index");
        Bytes rb = from_hex(entry->at("record").get<std::string>());
        Bytes pb = from_hex(entry->at("path").get<std::string>());
        ByteReader rr(rb, Errc::invalid_argument), pr(pb, Errc::invalid_argument);
        OutputRecord rec{read_commitment(grp, rr), grp.read_element(rr)};
        auto path = read_merkle_path(pr);
        const auto& coin = entry->at("coin");
        Opening o{grp.scalar(mpz_class(static_cast<unsigned long>(coin.at("value").get<std::uint64_t>()))),
                  scalar_from_hex(grp, coin.at("randomness"))};
        ok = verify_confirmation(grp, cb, rec, o, path, conf);
      } catch (const json::exception& e) {
        fail(Errc::invalid_argument, conf_path + ": " + e.what());
      }
      emit(g, std::string(ok ? "true" : "false") + "\n");
      return ok ? 0 : 1;
    }

    if (*sm) {
      auto sim = anon::simulate_waiting(lambda, k_max, trials, g.seed_set ? g.seed : 1);
      std::ostringstream os;
      os << "k,mean_wait,p50,p999\n" << std::setprecision(10);
      for (const auto& r : sim.per_k) os << r.k << ',' << r.mean_wait << ',' << r.p50 << ',' << r.p999 << '\n';
      emit(g, os.str());
      return 0;
    }

    if (*md) {
      enforce(prob > 0 && prob < 1, Errc::invalid_probability, "--prob must lie in (0, 1)");
      std::ostringstream os;
      os << "k,poisson_pmf,prob_at_least,waiting_quantile\n" << std::setprecision(12);
      for (std::uint64_t k = 1; k <= k_max; ++k)
        os << k << ',' << anon::poisson_pmf(lambda, window, k) << ',' << anon::prob_at_least(lambda, window, k) << ','
           << anon::waiting_quantile(lambda, k, prob) << '\n';
      os << "# achieved_k=" << anon::achieved_k(lambda, window) << '\n';
      emit(g, os.str());
      return 0;
    }

    if (*bn) {
      Group grp = load_group(g);
      Rng rng = make_rng(g);
      emit(g, bench::to_csv(bench::overhead_sweep(grp, sizes, reps, rng)));
      return 0;
    }

    if (*ad) {
      attack::ToyCipherConfig cfg{bits, 0};
      auto res = attack::forgery_trial(cfg, q1, atk_trials, g.seed_set ? g.seed : 1);
      std::ostringstream os;
      os << std::setprecision(6) << std::fixed << "bits=" << bits << " q1=" << q1 << " trials=" << atk_trials
         << " empirical=" << res.rate() << " theoretical=" << attack::theoretical_rate(cfg, q1) << '\n';
      Group grp = load_group(g);
      Rng rng = make_rng(g);
      auto c = attack::pedersen_substitution(grp, q1 % (1u << 16), 16, 1u << 16, rng);
      os << "pedersen: candidates=" << c.candidates << " alternative_openings=" << c.openings_found
         << " honest_found=" << c.honest_found << " per_candidate_rate=" << std::scientific
         << static_cast<double>(c.openings_found) / static_cast<double>(c.candidates)
         << " expected_by_chance=" << c.expected_hits << '\n';
      emit(g, os.str());
      return 0;
    }

    if (*sc) {
      Group grp = load_group(g);
      Bytes script = read_file(script_path);
      scenario::ScenarioConfig cfg{g.seed_set ? g.seed : 1, range_bits, latency};
      auto t = scenario::run_scenario(grp, cfg, std::string_view(reinterpret_cast<const char*>(script.data()), script.size()));
      if (g.out.empty()) {
        std::cout << t.csv();
      } else {
        std::filesystem::create_directories(g.out);
        write_text(g.out + "/transcript.csv", t.csv());
        write_text(g.out + "/frames.log", t.frame_log());
      }
      auto b = scenario::scan_boundary(grp, t);
      std::cerr << "digest " << to_hex(t.digest()) << "\nexpectations " << t.expectations - t.failures.size() << "/"
                << t.expectations << " met\nboundary " << (b.clean() ? "clean" : "VIOLATED") << "\n";
      for (const auto& f : t.failures) std::cerr << "unmet: " << f << "\n";
      return t.all_expectations_met() && b.clean() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
