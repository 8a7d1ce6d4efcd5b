#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rcbdc/ledger.hpp"

namespace rcbdc::wire {

enum class NodeRole : std::uint8_t { user_wallet = 1, bank = 2, central_bank = 3 };

inline std::string_view role_name(NodeRole r) {
  switch (r) {
    case NodeRole::user_wallet: return "user-wallet";
    case NodeRole::bank: return "bank";
    case NodeRole::central_bank: return "central-bank";
  }
  return "unknown";
}

// user -> bank
struct PaymentRequest {
  std::uint64_t request_id = 0;
  PaymentIntent intent;

  bool operator==(const PaymentRequest&) const = default;
};

// bank -> user: the transaction to sign and the openings of this payer's part
struct TxProposal {
  std::uint64_t request_id = 0;
  ConcealedTx tx;
  OpeningPacket packet;

  bool operator==(const TxProposal&) const = default;
};

// user -> bank
struct SignedComponent {
  std::uint64_t request_id = 0;
  std::vector<PayerSignature> signatures;

  bool operator==(const SignedComponent&) const = default;
};

// bank -> central bank
struct SubmitTx {
  ConcealedTx tx;

  bool operator==(const SubmitTx&) const = default;
};

// central bank -> bank (no opening), bank -> payee (with opening)
struct Confirmation {
  ConfirmationRecord record;
  std::uint32_t output_index = 0;
  OutputRecord output;
  MerklePath path;
  std::optional<Opening> opening;

  bool operator==(const Confirmation&) const = default;
};

// central bank -> bank, bank -> payer
struct RejectionNotice {
  TxId tx_id{};
  RejectReason reason = RejectReason::verify_failed;
  std::optional<VerifyReport> report;

  bool operator==(const RejectionNotice&) const = default;
};

using Body = std::variant<PaymentRequest, TxProposal, SignedComponent, SubmitTx, Confirmation, RejectionNotice>;

enum class MsgType : std::uint8_t {
  payment_request = 1,
  tx_proposal = 2,
  signed_component = 3,
  submit_tx = 4,
  confirmation = 5,
  rejection = 6,
};

inline std::string_view type_name(MsgType t) {
  switch (t) {
    case MsgType::payment_request: return "PaymentRequest";
    case MsgType::tx_proposal: return "TxProposal";
    case MsgType::signed_component: return "SignedComponent";
    case MsgType::submit_tx: return "SubmitTx";
    case MsgType::confirmation: return "Confirmation";
    case MsgType::rejection: return "Rejection";
  }
  return "unknown";
}

struct Message {
  NodeRole sender = NodeRole::user_wallet;
  std::uint64_t seq = 0;
  Body body;

  MsgType type() const { return static_cast<MsgType>(body.index() + 1); }
  bool operator==(const Message&) const = default;
};

constexpr std::uint8_t kWireVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 1 + 1 + 1 + 8;

// ---- payload encoders ----

namespace detail {

inline void write_payload(const Group& grp, ByteWriter& w, const PaymentRequest& m) {
  w.u64(m.request_id);
  w.u32(static_cast<std::uint32_t>(m.intent.spends.size()));
  for (const auto& id : m.intent.spends) w.raw(id);
  w.u32(static_cast<std::uint32_t>(m.intent.payouts.size()));
  for (const auto& p : m.intent.payouts) {
    w.u64(p.value);
    grp.write(w, p.owner);
  }
}

inline void write_payload(const Group& grp, ByteWriter& w, const TxProposal& m) {
  w.u64(m.request_id);
  w.blob(encode_tx(grp, m.tx));
  write(grp, w, m.packet);
}

inline void write_payload(const Group& grp, ByteWriter& w, const SignedComponent& m) {
  w.u64(m.request_id);
  w.u32(static_cast<std::uint32_t>(m.signatures.size()));
  for (const auto& s : m.signatures) {
    grp.write(w, s.pubkey);
    write(grp, w, s.sig);
  }
}

inline void write_payload(const Group& grp, ByteWriter& w, const SubmitTx& m) { w.blob(encode_tx(grp, m.tx)); }

inline void write_payload(const Group& grp, ByteWriter& w, const Confirmation& m) {
  write(grp, w, m.record);
  w.u32(m.output_index);
  w.raw(encode_output_record(grp, m.output));
  write(w, m.path);
  w.u8(m.opening ? 1 : 0);
  if (m.opening) write(grp, w, *m.opening);
}

inline void write_payload(const Group& grp, ByteWriter& w, const RejectionNotice& m) {
  w.raw(m.tx_id).u8(static_cast<std::uint8_t>(m.reason));
  w.u8(m.report ? 1 : 0);
  if (m.report) {
    w.u8(m.report->payer_sig_ok).u8(m.report->range_ok).u8(m.report->balance_ok);
    grp.write(w, m.report->z);
  }
}

inline bool read_flag(ByteReader& r) {
  std::uint8_t b = r.u8();
  enforce(b <= 1, Errc::malformed_frame, "flag byte must be 0 or 1");
  return b == 1;
}

inline ConcealedTx read_embedded_tx(const Group& grp, ByteReader& r) {
  Bytes b = r.blob();
  ByteReader inner(b);
  ConcealedTx tx = read_tx(grp, inner);
  inner.expect_done();
  return tx;
}

inline Body read_payload(const Group& grp, MsgType t, ByteReader& r) {
  switch (t) {
    case MsgType::payment_request: {
      PaymentRequest m;
      m.request_id = r.u64();
      for (std::uint32_t n = r.u32(); n > 0; --n) m.intent.spends.push_back(r.array<32>());
      for (std::uint32_t n = r.u32(); n > 0; --n) {
        Payout p;
        p.value = r.u64();
        p.owner = grp.read_element(r);
        m.intent.payouts.push_back(p);
      }
      return m;
    }
    case MsgType::tx_proposal: {
      TxProposal m;
      m.request_id = r.u64();
      m.tx = read_embedded_tx(grp, r);
      m.packet = read_opening_packet(grp, r);
      return m;
    }
    case MsgType::signed_component: {
      SignedComponent m;
      m.request_id = r.u64();
      for (std::uint32_t n = r.u32(); n > 0; --n) {
        PayerSignature s;
        s.pubkey = grp.read_element(r);
        s.sig = read_signature(grp, r);
        m.signatures.push_back(s);
      }
      return m;
    }
    case MsgType::submit_tx: return SubmitTx{read_embedded_tx(grp, r)};
    case MsgType::confirmation: {
      Confirmation m;
      m.record = read_confirmation(grp, r);
      m.output_index = r.u32();
      m.output.commitment = read_commitment(grp, r);
      m.output.owner = grp.read_element(r);
      m.path = read_merkle_path(r);
      if (read_flag(r)) m.opening = read_opening(grp, r);
      return m;
    }
    case MsgType::rejection: {
      RejectionNotice m;
      m.tx_id = r.array<32>();
      std::uint8_t reason = r.u8();
      enforce(reason >= 1 && reason <= 3, Errc::malformed_frame, "unknown rejection reason");
      m.reason = static_cast<RejectReason>(reason);
      if (read_flag(r)) {
        VerifyReport rep;
        rep.payer_sig_ok = read_flag(r);
        rep.range_ok = read_flag(r);
        rep.balance_ok = read_flag(r);
        rep.z = grp.read_element(r);
        m.report = rep;
      }
      return m;
    }
  }
  fail(Errc::malformed_frame, "unknown message type");
}

}  // namespace detail

// Frame: be32 length of everything after the length field | u8 version |
// u8 type | u8 sender role | be64 seq | payload.
inline Bytes encode(const Group& grp, const Message& msg) {
  ByteWriter payload;
  std::visit([&](const auto& b) { detail::write_payload(grp, payload, b); }, msg.body);
  const Bytes& p = payload.bytes();
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(kHeaderSize - 4 + p.size()));
  w.u8(kWireVersion).u8(static_cast<std::uint8_t>(msg.type())).u8(static_cast<std::uint8_t>(msg.sender)).u64(msg.seq);
  w.raw(p);
  return std::move(w).take();
}

inline Message decode(const Group& grp, ByteView frame) {
  ByteReader r(frame);
  std::uint32_t len = r.u32();
  enforce(len == r.remaining(), Errc::malformed_frame, "frame length does not match");
  std::uint8_t version = r.u8();
  enforce(version == kWireVersion, Errc::version_mismatch, "unsupported wire version " + std::to_string(version));
  std::uint8_t type = r.u8();
  enforce(type >= 1 && type <= 6, Errc::malformed_frame, "unknown message type");
  std::uint8_t role = r.u8();
  enforce(role >= 1 && role <= 3, Errc::malformed_frame, "unknown sender role");
  Message m;
  m.sender = static_cast<NodeRole>(role);
  m.seq = r.u64();
  try {
    m.body = detail::read_payload(grp, static_cast<MsgType>(type), r);
  } catch (const Error& e) {
    // Payload-level checks (membership, scalar range) surface as malformed frames.
    if (e.code() == Errc::version_mismatch) throw;
    fail(Errc::malformed_frame, e.what());
  }
  r.expect_done();
  return m;
}

}  // namespace rcbdc::wire
