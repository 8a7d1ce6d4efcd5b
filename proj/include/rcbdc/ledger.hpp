#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rcbdc/merkle.hpp"
#include "rcbdc/tx.hpp"

namespace rcbdc {

struct ConfirmationRecord {
  TxId tx_id{};
  Digest merkle_root{};
  Signature root_signature;

  bool operator==(const ConfirmationRecord&) const = default;
};

struct LogEntry {
  ConcealedTx tx;
  ConfirmationRecord confirmation;
};

// Central-bank state. The log is authoritative; `live` and `seen` are
// indexes derived from it.
struct LedgerState {
  std::map<UtxoId, UtxoRecord> live;
  std::set<TxId> seen;
  std::vector<LogEntry> log;
  SchnorrKeyPair cb_key;
  OpeningPacket genesis_openings;
  std::uint64_t total_supply = 0;
  unsigned range_bits = 0;

  const UtxoRecord* find(const UtxoId& id) const {
    auto it = live.find(id);
    return it == live.end() ? nullptr : &it->second;
  }
};

enum class RejectReason : std::uint8_t { unknown_input = 1, verify_failed = 2, duplicate_tx_id = 3 };

inline std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::unknown_input: return "unknown-input";
    case RejectReason::verify_failed: return "verify-failed";
    case RejectReason::duplicate_tx_id: return "duplicate-tx-id";
  }
  return "unknown";
}

struct Rejection {
  RejectReason reason;
  std::optional<VerifyReport> report;

  bool operator==(const Rejection&) const = default;
};

using ApplyOutcome = std::variant<ConfirmationRecord, Rejection>;

// ---- merkle leaves and confirmation messages ----

inline Digest output_leaf(const Group& grp, const TxId& tx, std::uint32_t index, const OutputRecord& out) {
  return Sha256().u8(0x00).update("rcbdc/leaf/v1").update(tx).u32(index)
      .update(ByteView(encode_output_record(grp, out))).final();
}

inline std::vector<Digest> output_leaves(const Group& grp, const TxId& tx, const std::vector<OutputRecord>& outs) {
  std::vector<Digest> leaves;
  leaves.reserve(outs.size());
  for (std::uint32_t i = 0; i < outs.size(); ++i) leaves.push_back(output_leaf(grp, tx, i, outs[i]));
  return leaves;
}

inline Digest confirmation_message(const Group& grp, const TxId& tx, const Digest& root) {
  return Sha256().update("rcbdc/confirm/v1").update(grp.digest()).update(tx).update(root).final();
}

inline std::vector<MerklePath> confirmation_paths(const Group& grp, const ConcealedTx& tx) {
  auto leaves = output_leaves(grp, tx_id(grp, tx), tx.outputs);
  std::vector<MerklePath> paths;
  for (std::size_t i = 0; i < leaves.size(); ++i) paths.push_back(inclusion_proof(leaves, i));
  return paths;
}

namespace detail {

inline ConfirmationRecord confirm(const Group& grp, const SchnorrKeyPair& cb, const TxId& id,
                                  const std::vector<OutputRecord>& outs, Rng& rng) {
  ConfirmationRecord rec;
  rec.tx_id = id;
  if (!outs.empty()) rec.merkle_root = merkle_root(output_leaves(grp, id, outs));
  auto msg = confirmation_message(grp, id, rec.merkle_root);
  rec.root_signature = sign(grp, cb, SigDomain::confirmation, ByteView(msg), rng);
  return rec;
}

inline void insert_outputs(std::map<UtxoId, UtxoRecord>& live, const TxId& id, const std::vector<OutputRecord>& outs) {
  for (std::uint32_t i = 0; i < outs.size(); ++i) {
    UtxoRecord r{utxo_id_for(id, i), outs[i].commitment, outs[i].owner, id, i};
    live[r.utxo_id] = r;
  }
}

}  // namespace detail

struct MintResult {
  LedgerState state;
  OpeningPacket openings;
};

// Writes log entry 0. The central bank keeps the genesis openings; no other
// opening ever reaches it.
inline MintResult mint_genesis(const Group& grp, const std::vector<Payout>& payouts, unsigned range_bits, Rng& rng) {
  validate_range_bits(grp, range_bits);
  MintResult res;
  auto& st = res.state;
  st.range_bits = range_bits;
  st.cb_key = keygen(grp, grp.g(), rng);

  ConcealedTx genesis;
  for (std::uint32_t i = 0; i < payouts.size(); ++i) {
    enforce(mpz_class(static_cast<unsigned long>(payouts[i].value)) < grp.q(), Errc::value_out_of_range,
            "minted amount must be below q");
    enforce(st.total_supply + payouts[i].value >= st.total_supply, Errc::value_out_of_range, "supply overflow");
    st.total_supply += payouts[i].value;
    Opening o{detail::scalar_of(grp, payouts[i].value), grp.random_scalar(rng)};
    genesis.outputs.push_back({commit(grp, o), payouts[i].owner});
    res.openings.outputs.emplace_back(i, o);
  }
  st.genesis_openings = res.openings;
  TxId id = tx_id(grp, genesis);
  detail::insert_outputs(st.live, id, genesis.outputs);
  st.seen.insert(id);
  st.log.push_back({genesis, detail::confirm(grp, st.cb_key, id, genesis.outputs, rng)});
  return res;
}

// All-or-nothing: on rejection `state` is untouched.
inline ApplyOutcome apply_tx(LedgerState& state, const Group& grp, const ConcealedTx& tx, Rng& rng) {
  std::set<UtxoId> ids;
  for (const auto& in : tx.inputs)
    if (!state.find(in.ref.utxo_id) || !ids.insert(in.ref.utxo_id).second)
      return Rejection{RejectReason::unknown_input, std::nullopt};
  TxId id = tx_id(grp, tx);
  if (state.seen.count(id)) return Rejection{RejectReason::duplicate_tx_id, std::nullopt};
  VerifyReport rep = central_verify(state, grp, tx, state.range_bits);
  if (!rep.accepted()) return Rejection{RejectReason::verify_failed, rep};

  ConfirmationRecord rec = detail::confirm(grp, state.cb_key, id, tx.outputs, rng);
  for (const auto& in : tx.inputs) state.live.erase(in.ref.utxo_id);
  detail::insert_outputs(state.live, id, tx.outputs);
  state.seen.insert(id);
  state.log.push_back({tx, rec});
  return rec;
}

inline bool verify_confirmation(const Group& grp, const GroupElement& cb_pubkey, const OutputRecord& record,
                                const Opening& opening, const MerklePath& path, const ConfirmationRecord& conf) {
  if (!open_check(grp, record.commitment, opening)) return false;
  if (!verify_inclusion(conf.merkle_root, output_leaf(grp, conf.tx_id, path.leaf_index, record), path)) return false;
  auto msg = confirmation_message(grp, conf.tx_id, conf.merkle_root);
  return verify(grp, grp.g(), cb_pubkey, SigDomain::confirmation, ByteView(msg), conf.root_signature);
}

// Rebuilds the live set from the log alone.
inline std::map<UtxoId, UtxoRecord> replay_live_set(const Group& grp, const std::vector<LogEntry>& log) {
  std::map<UtxoId, UtxoRecord> live;
  for (const auto& e : log) {
    for (const auto& in : e.tx.inputs) live.erase(in.ref.utxo_id);
    detail::insert_outputs(live, tx_id(grp, e.tx), e.tx.outputs);
  }
  return live;
}

// Re-checks every confirmed transfer offline: z = prod C / prod C' must be
// the key under which the balance signature verifies.
inline bool audit_conservation(const Group& grp, const LedgerState& st) {
  for (std::size_t i = 1; i < st.log.size(); ++i) {
    const auto& tx = st.log[i].tx;
    std::vector<Commitment> c_in, c_out;
    for (const auto& in : tx.inputs) c_in.push_back(in.commitment);
    for (const auto& out : tx.outputs) c_out.push_back(out.commitment);
    auto z = combine(grp, c_in, c_out);
    auto msg = signed_message(grp, tx);
    if (z == grp.identity() || !verify(grp, grp.h(), z, SigDomain::balance, ByteView(msg), tx.balance_sig))
      return false;
  }
  return true;
}

// ---- encodings ----

inline void write(const Group& grp, ByteWriter& w, const ConfirmationRecord& c) {
  w.raw(ByteView(c.tx_id)).raw(ByteView(c.merkle_root));
  write(grp, w, c.root_signature);
}

inline ConfirmationRecord read_confirmation(const Group& grp, ByteReader& r) {
  ConfirmationRecord c;
  c.tx_id = r.array<32>();
  c.merkle_root = r.array<32>();
  c.root_signature = read_signature(grp, r);
  return c;
}

inline void write(const Group& grp, ByteWriter& w, const UtxoRecord& u) {
  w.raw(ByteView(u.utxo_id));
  grp.write(w, u.commitment.point);
  grp.write(w, u.owner);
  w.raw(ByteView(u.created_tx_id)).u32(u.index);
}

inline UtxoRecord read_utxo_record(const Group& grp, ByteReader& r) {
  UtxoRecord u;
  u.utxo_id = r.array<32>();
  u.commitment = {grp.read_element(r)};
  u.owner = grp.read_element(r);
  u.created_tx_id = r.array<32>();
  u.index = r.u32();
  return u;
}

inline Bytes encode_log_record(const Group& grp, const LogEntry& e) {
  ByteWriter w;
  w.blob(ByteView(encode_tx(grp, e.tx)));
  write(grp, w, e.confirmation);
  return std::move(w).take();
}

inline LogEntry decode_log_record(const Group& grp, ByteReader& r) {
  LogEntry e;
  Bytes txb = r.blob();
  ByteReader tr(ByteView(txb), r.error_code());
  e.tx = read_tx(grp, tr);
  tr.expect_done();
  e.confirmation = read_confirmation(grp, r);
  return e;
}

// ---- snapshot: full state, sealed with a trailing SHA-256 ----
//
// The snapshot carries the confirmation signing key; treat the file as secret.

inline Bytes snapshot(const LedgerState& st, const Group& grp) {
  ByteWriter w;
  w.raw(as_bytes("RCBS")).u8(1).raw(ByteView(grp.digest()));
  grp.write(w, st.cb_key.secret);
  w.u8(static_cast<std::uint8_t>(st.range_bits)).u64(st.total_supply);
  write(grp, w, st.genesis_openings);
  w.u32(static_cast<std::uint32_t>(st.log.size()));
  for (const auto& e : st.log) w.blob(ByteView(encode_log_record(grp, e)));
  w.u32(static_cast<std::uint32_t>(st.live.size()));
  for (const auto& [id, u] : st.live) write(grp, w, u);
  Bytes out = std::move(w).take();
  auto d = sha256(out);
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

inline void snapshot(const LedgerState& st, const Group& grp, std::ostream& sink) {
  auto b = snapshot(st, grp);
  sink.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  enforce(sink.good(), Errc::io_error, "snapshot write failed");
}

inline LedgerState restore(const Group& grp, ByteView in) {
  constexpr Errc bad = Errc::corrupt_snapshot;
  enforce(in.size() > 32, bad, "snapshot too short");
  auto body = in.first(in.size() - 32);
  Digest stored{};
  std::copy(in.end() - 32, in.end(), stored.begin());
  enforce(sha256(body) == stored, bad, "snapshot digest mismatch");

  ByteReader r(body, bad);
  auto magic = r.raw(4);
  enforce(std::string(magic.begin(), magic.end()) == "RCBS", bad, "bad snapshot magic");
  enforce(r.u8() == 1, Errc::version_mismatch, "unsupported snapshot version");
  enforce(r.array<32>() == grp.digest(), bad, "snapshot was written for different parameters");

  LedgerState st;
  st.cb_key = keypair_from_secret(grp, grp.g(), grp.read_scalar(r));
  st.range_bits = r.u8();
  st.total_supply = r.u64();
  st.genesis_openings = read_opening_packet(grp, r);
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    Bytes rec = r.blob();
    ByteReader rr(ByteView(rec), bad);
    st.log.push_back(decode_log_record(grp, rr));
    rr.expect_done();
  }
  std::map<UtxoId, UtxoRecord> stored_live;
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    auto u = read_utxo_record(grp, r);
    stored_live[u.utxo_id] = u;
  }
  r.expect_done();

  enforce(!st.log.empty(), bad, "snapshot has no genesis entry");
  st.live = replay_live_set(grp, st.log);
  enforce(st.live == stored_live, bad, "live set does not match the log");
  for (const auto& e : st.log) {
    TxId id = tx_id(grp, e.tx);
    enforce(id == e.confirmation.tx_id, bad, "confirmation does not match its transaction");
    enforce(st.seen.insert(id).second, bad, "duplicate transaction in log");
    auto msg = confirmation_message(grp, id, e.confirmation.merkle_root);
    enforce(verify(grp, grp.g(), st.cb_key.public_key, SigDomain::confirmation, ByteView(msg),
                   e.confirmation.root_signature),
            bad, "confirmation signature does not verify");
  }
  return st;
}

inline LedgerState restore(const Group& grp, std::istream& source) {
  Bytes b((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  return restore(grp, ByteView(b));
}

// ---- append-only log file ----
//
// Header: "RCBL", version, params digest, genesis tx id. Then one
// length-prefixed record per confirmed transaction, genesis first.

class LedgerLogWriter {
 public:
  LedgerLogWriter(const std::string& path, const Group& grp, const TxId& genesis_id)
      : grp_(&grp), out_(path, std::ios::binary | std::ios::trunc) {
    enforce(out_.good(), Errc::io_error, "cannot open " + path);
    ByteWriter w;
    w.raw(as_bytes("RCBL")).u8(1).raw(ByteView(grp.digest())).raw(ByteView(genesis_id));
    put(w.bytes());
  }

  void append(const LogEntry& e) {
    ByteWriter w;
    w.blob(ByteView(encode_log_record(*grp_, e)));
    put(w.bytes());
    out_.flush();
  }

 private:
  void put(const Bytes& b) {
    out_.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    enforce(out_.good(), Errc::io_error, "log write failed");
  }
  const Group* grp_;
  std::ofstream out_;
};

struct LedgerLogFile {
  TxId genesis_id{};
  std::vector<LogEntry> entries;
};

inline LedgerLogFile read_ledger_log(const Group& grp, ByteView in) {
  constexpr Errc bad = Errc::corrupt_snapshot;
  ByteReader r(in, bad);
  auto magic = r.raw(4);
  enforce(std::string(magic.begin(), magic.end()) == "RCBL", bad, "bad log magic");
  enforce(r.u8() == 1, Errc::version_mismatch, "unsupported log version");
  enforce(r.array<32>() == grp.digest(), bad, "log was written for different parameters");
  LedgerLogFile f;
  f.genesis_id = r.array<32>();
  while (!r.done()) {
    Bytes rec = r.blob();
    ByteReader rr(ByteView(rec), bad);
    f.entries.push_back(decode_log_record(grp, rr));
    rr.expect_done();
  }
  enforce(!f.entries.empty() && tx_id(grp, f.entries.front().tx) == f.genesis_id, bad,
          "log does not start with its genesis record");
  return f;
}

}  // namespace rcbdc
