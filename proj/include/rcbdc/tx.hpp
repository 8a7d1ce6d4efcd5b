#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "rcbdc/pedersen.hpp"
#include "rcbdc/rangeproof.hpp"
#include "rcbdc/schnorr.hpp"

namespace rcbdc {

using UtxoId = Digest;
using TxId = Digest;

struct InputRef {
  UtxoId utxo_id{};
  GroupElement owner;

  bool operator==(const InputRef&) const = default;
};

struct TxInput {
  InputRef ref;
  Commitment commitment;

  bool operator==(const TxInput&) const = default;
};

struct OutputRecord {
  Commitment commitment;
  GroupElement owner;

  bool operator==(const OutputRecord&) const = default;
};

struct PayerSignature {
  GroupElement pubkey;
  Signature sig;

  bool operator==(const PayerSignature&) const = default;
};

// (C, C', RP, sigma_bank, sigma_payer). A transaction with no inputs is only
// valid as the genesis record.
struct ConcealedTx {
  std::vector<TxInput> inputs;
  std::vector<OutputRecord> outputs;
  std::vector<RangeProof> range_proofs;
  Signature balance_sig;
  std::vector<PayerSignature> payer_sigs;

  bool operator==(const ConcealedTx&) const = default;
};

struct Payout {
  std::uint64_t value = 0;
  GroupElement owner;

  bool operator==(const Payout&) const = default;
  auto operator<=>(const Payout&) const = default;
};

struct SpendOpening {
  InputRef ref;
  Opening opening;
};

// Openings keyed by position in the transaction. Never part of the
// transaction itself.
struct OpeningPacket {
  std::vector<std::pair<std::uint32_t, Opening>> inputs;
  std::vector<std::pair<std::uint32_t, Opening>> outputs;

  bool operator==(const OpeningPacket&) const = default;
};

struct VerifyReport {
  bool payer_sig_ok = false;
  bool range_ok = false;
  bool balance_ok = false;
  GroupElement z;

  bool accepted() const { return payer_sig_ok && range_ok && balance_ok; }
  bool operator==(const VerifyReport&) const = default;
};

struct UtxoRecord {
  UtxoId utxo_id{};
  Commitment commitment;
  GroupElement owner;
  TxId created_tx_id{};
  std::uint32_t index = 0;

  bool operator==(const UtxoRecord&) const = default;
};

// Read-only view of the live UTXO set.
template <class V>
concept UtxoLookup = requires(const V& v, const UtxoId& id) {
  { v.find(id) } -> std::convertible_to<const UtxoRecord*>;
};

inline UtxoId utxo_id_for(const TxId& tx, std::uint32_t index) {
  return Sha256().update("rcbdc/utxo/v1").update(tx).u32(index).final();
}

// ---- canonical encoding ----

namespace detail {

inline void write_tx_body(const Group& grp, ByteWriter& w, const ConcealedTx& tx) {
  w.u32(static_cast<std::uint32_t>(tx.inputs.size()));
  for (const auto& in : tx.inputs) {
    w.raw(ByteView(in.ref.utxo_id));
    grp.write(w, in.ref.owner);
    grp.write(w, in.commitment.point);
  }
  w.u32(static_cast<std::uint32_t>(tx.outputs.size()));
  for (const auto& out : tx.outputs) {
    grp.write(w, out.commitment.point);
    grp.write(w, out.owner);
  }
}

inline void write_proofs(const Group& grp, ByteWriter& w, const ConcealedTx& tx) {
  w.u32(static_cast<std::uint32_t>(tx.range_proofs.size()));
  for (const auto& p : tx.range_proofs) write(grp, w, p);
}

}  // namespace detail

inline Bytes encode_output_record(const Group& grp, const OutputRecord& out) {
  ByteWriter w;
  grp.write(w, out.commitment.point);
  grp.write(w, out.owner);
  return std::move(w).take();
}

// Message covered by the balance signature and every payer signature: the
// inputs with their commitments and owners, and the output records.
inline Digest signed_message(const Group& grp, const ConcealedTx& tx) {
  ByteWriter w;
  detail::write_tx_body(grp, w, tx);
  return Sha256().update("rcbdc/tx-msg/v1").update(grp.digest()).update(ByteView(w.bytes())).final();
}

// Everything except the signatures.
inline TxId tx_id(const Group& grp, const ConcealedTx& tx) {
  ByteWriter w;
  detail::write_tx_body(grp, w, tx);
  detail::write_proofs(grp, w, tx);
  return Sha256().update("rcbdc/txid/v1").update(grp.digest()).update(ByteView(w.bytes())).final();
}

inline void write(const Group& grp, ByteWriter& w, const ConcealedTx& tx) {
  detail::write_tx_body(grp, w, tx);
  detail::write_proofs(grp, w, tx);
  write(grp, w, tx.balance_sig);
  w.u32(static_cast<std::uint32_t>(tx.payer_sigs.size()));
  for (const auto& ps : tx.payer_sigs) {
    grp.write(w, ps.pubkey);
    write(grp, w, ps.sig);
  }
}

inline Bytes encode_tx(const Group& grp, const ConcealedTx& tx) {
  ByteWriter w;
  write(grp, w, tx);
  return std::move(w).take();
}

inline ConcealedTx read_tx(const Group& grp, ByteReader& r) {
  // Each list entry is at least one element wide; reject counts the input cannot hold.
  auto count = [&] {
    std::uint32_t n = r.u32();
    enforce(n <= r.remaining(), r.error_code(), "list count exceeds input");
    return n;
  };
  ConcealedTx tx;
  for (std::uint32_t i = count(); i > 0; --i) {
    TxInput in;
    in.ref.utxo_id = r.array<32>();
    in.ref.owner = grp.read_element(r);
    in.commitment = {grp.read_element(r)};
    tx.inputs.push_back(in);
  }
  for (std::uint32_t i = count(); i > 0; --i) {
    OutputRecord out;
    out.commitment = {grp.read_element(r)};
    out.owner = grp.read_element(r);
    tx.outputs.push_back(out);
  }
  for (std::uint32_t i = count(); i > 0; --i) tx.range_proofs.push_back(read_range_proof(grp, r));
  tx.balance_sig = read_signature(grp, r);
  for (std::uint32_t i = count(); i > 0; --i) {
    PayerSignature ps;
    ps.pubkey = grp.read_element(r);
    ps.sig = read_signature(grp, r);
    tx.payer_sigs.push_back(ps);
  }
  return tx;
}

inline ConcealedTx decode_tx(const Group& grp, ByteView in) {
  ByteReader r(in);
  auto tx = read_tx(grp, r);
  r.expect_done();
  return tx;
}

inline void write(const Group& grp, ByteWriter& w, const OpeningPacket& p) {
  for (const auto* side : {&p.inputs, &p.outputs}) {
    w.u32(static_cast<std::uint32_t>(side->size()));
    for (const auto& [pos, o] : *side) {
      w.u32(pos);
      write(grp, w, o);
    }
  }
}

inline OpeningPacket read_opening_packet(const Group& grp, ByteReader& r) {
  OpeningPacket p;
  for (auto* side : {&p.inputs, &p.outputs}) {
    std::uint32_t n = r.u32();
    enforce(n <= r.remaining(), r.error_code(), "list count exceeds input");
    for (std::uint32_t i = 0; i < n; ++i) {
      std::uint32_t pos = r.u32();
      side->emplace_back(pos, read_opening(grp, r));
    }
  }
  return p;
}

// ---- construction ----

struct BuiltTx {
  ConcealedTx tx;
  OpeningPacket packet;
};

struct OwnedOutput {
  Payout payout;
  Opening opening;
};

namespace detail {

inline Scalar scalar_of(const Group& grp, std::uint64_t v) {
  return grp.scalar(mpz_class(static_cast<unsigned long>(v)));
}

// Assembles and bank-signs a transaction from explicit openings without
// checking that amounts balance. If alpha comes out zero the last output's
// randomness is resampled.
inline BuiltTx assemble_tx(const Group& grp, const std::vector<SpendOpening>& spends,
                           std::vector<OwnedOutput> outputs, unsigned n_bits, Rng& rng) {
  enforce(!outputs.empty(), Errc::invalid_argument, "transaction needs at least one output");
  std::vector<Scalar> in_r, out_r;
  for (const auto& s : spends) in_r.push_back(s.opening.randomness);
  std::optional<SchnorrKeyPair> bal;
  for (;;) {
    out_r.clear();
    for (const auto& o : outputs) out_r.push_back(o.opening.randomness);
    bal = balance_key(grp, in_r, out_r);
    if (bal) break;
    outputs.back().opening.randomness = grp.random_scalar(rng);
  }

  BuiltTx built;
  for (std::uint32_t i = 0; i < spends.size(); ++i) {
    built.tx.inputs.push_back({spends[i].ref, commit(grp, spends[i].opening)});
    built.packet.inputs.emplace_back(i, spends[i].opening);
  }
  for (std::uint32_t j = 0; j < outputs.size(); ++j) {
    built.tx.outputs.push_back({commit(grp, outputs[j].opening), outputs[j].payout.owner});
    built.tx.range_proofs.push_back(prove_range(grp, outputs[j].opening, n_bits, rng));
    built.packet.outputs.emplace_back(j, outputs[j].opening);
  }
  auto msg = signed_message(grp, built.tx);
  built.tx.balance_sig = sign(grp, *bal, SigDomain::balance, ByteView(msg), rng);
  return built;
}

}  // namespace detail

inline BuiltTx build_concealed_tx(const Group& grp, const std::vector<SpendOpening>& spends,
                                  const std::vector<Payout>& payouts, unsigned n_bits, Rng& rng) {
  validate_range_bits(grp, n_bits);
  enforce(!spends.empty(), Errc::invalid_argument, "transaction needs at least one input");
  enforce(!payouts.empty(), Errc::invalid_argument, "transaction needs at least one output");
  mpz_class in_sum = 0, out_sum = 0;
  for (const auto& s : spends) in_sum += s.opening.value.value();
  for (const auto& p : payouts) {
    enforce(mpz_class(static_cast<unsigned long>(p.value)) < (mpz_class(1) << n_bits),
            Errc::value_out_of_range, "payout " + std::to_string(p.value) + " exceeds 2^n");
    out_sum += static_cast<unsigned long>(p.value);
  }
  enforce(in_sum == out_sum, Errc::unbalanced_amounts,
          "inputs sum to " + in_sum.get_str() + " but payouts sum to " + out_sum.get_str());

  std::vector<OwnedOutput> outputs;
  for (const auto& p : payouts) outputs.push_back({p, {detail::scalar_of(grp, p.value), grp.random_scalar(rng)}});
  return detail::assemble_tx(grp, spends, std::move(outputs), n_bits, rng);
}

// ---- payer side ----

// What the payer meant to do: which of its UTXOs to spend and to whom.
struct PaymentIntent {
  std::vector<UtxoId> spends;
  std::vector<Payout> payouts;

  bool operator==(const PaymentIntent&) const = default;
};

// Opens every commitment in the packet and checks that the transaction
// spends exactly the intended UTXOs among those owned by the payer's keys,
// and that the opened outputs match the intended payouts as a multiset.
inline bool payer_review(const Group& grp, const ConcealedTx& tx, const OpeningPacket& packet,
                         const PaymentIntent& intent) {
  std::set<GroupElement> payer_keys;
  std::set<std::uint32_t> covered;
  std::multiset<UtxoId> opened_spends;
  for (const auto& [pos, o] : packet.inputs) {
    if (pos >= tx.inputs.size() || !covered.insert(pos).second) return false;
    if (!open_check(grp, tx.inputs[pos].commitment, o)) return false;
    payer_keys.insert(tx.inputs[pos].ref.owner);
    opened_spends.insert(tx.inputs[pos].ref.utxo_id);
  }
  // Every input under one of the payer's keys must be accounted for.
  for (std::uint32_t i = 0; i < tx.inputs.size(); ++i)
    if (payer_keys.count(tx.inputs[i].ref.owner) && !covered.count(i)) return false;
  if (opened_spends != std::multiset<UtxoId>(intent.spends.begin(), intent.spends.end())) return false;

  std::multiset<Payout> opened;
  std::set<std::uint32_t> out_seen;
  for (const auto& [pos, o] : packet.outputs) {
    if (pos >= tx.outputs.size() || !out_seen.insert(pos).second) return false;
    if (!open_check(grp, tx.outputs[pos].commitment, o)) return false;
    if (o.value.value() > mpz_class(static_cast<unsigned long>(UINT64_MAX))) return false;
    opened.insert({o.value.value().get_ui(), tx.outputs[pos].owner});
  }
  return opened == std::multiset<Payout>(intent.payouts.begin(), intent.payouts.end());
}

inline PayerSignature payer_sign(const Group& grp, const ConcealedTx& tx, const SchnorrKeyPair& payer, Rng& rng) {
  auto msg = signed_message(grp, tx);
  return {payer.public_key, sign(grp, payer, SigDomain::payer, ByteView(msg), rng)};
}

// ---- central bank ----

// (1) inputs live with matching owner and commitment, one valid payer
// signature per distinct input owner and none from anyone else; (2) every
// output range proof; (3) z = prod C / prod C' as the public key (base h)
// for the balance signature.
template <UtxoLookup View>
VerifyReport central_verify(const View& view, const Group& grp, const ConcealedTx& tx, unsigned n_bits) {
  VerifyReport rep;
  auto msg = signed_message(grp, tx);

  bool inputs_ok = !tx.inputs.empty();
  std::set<GroupElement> owners;
  std::set<UtxoId> ids;
  for (const auto& in : tx.inputs) {
    const UtxoRecord* rec = view.find(in.ref.utxo_id);
    if (!rec || rec->owner != in.ref.owner || rec->commitment != in.commitment || !ids.insert(in.ref.utxo_id).second)
      inputs_ok = false;
    owners.insert(in.ref.owner);
  }
  std::set<GroupElement> signers;
  bool sigs_ok = true;
  for (const auto& ps : tx.payer_sigs) {
    if (!signers.insert(ps.pubkey).second) sigs_ok = false;
    if (!verify(grp, grp.g(), ps.pubkey, SigDomain::payer, ByteView(msg), ps.sig)) sigs_ok = false;
  }
  rep.payer_sig_ok = inputs_ok && sigs_ok && signers == owners;

  rep.range_ok = !tx.outputs.empty() && tx.range_proofs.size() == tx.outputs.size();
  for (std::size_t j = 0; rep.range_ok && j < tx.outputs.size(); ++j)
    rep.range_ok = verify_range(grp, tx.outputs[j].commitment, tx.range_proofs[j], n_bits);

  std::vector<Commitment> c_in, c_out;
  for (const auto& in : tx.inputs) c_in.push_back(in.commitment);
  for (const auto& out : tx.outputs) c_out.push_back(out.commitment);
  rep.z = combine(grp, c_in, c_out);
  rep.balance_ok = rep.z != grp.identity() &&
                   verify(grp, grp.h(), rep.z, SigDomain::balance, ByteView(msg), tx.balance_sig);
  return rep;
}

// Minimal in-memory view, handy for verification outside a ledger.
struct UtxoMapView {
  std::map<UtxoId, UtxoRecord> records;

  const UtxoRecord* find(const UtxoId& id) const {
    auto it = records.find(id);
    return it == records.end() ? nullptr : &it->second;
  }
  void add(const UtxoRecord& r) { records[r.utxo_id] = r; }
};

}  // namespace rcbdc
