#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rcbdc/coinjoin.hpp"
#include "rcbdc/ledger.hpp"
#include "rcbdc/pseudonym.hpp"
#include "rcbdc/wire.hpp"

namespace rcbdc::scenario {

using wire::NodeRole;

inline const std::string kBank = "bank";
inline const std::string kCentralBank = "central-bank";
inline std::string user_addr(const std::string& name) { return "user:" + name; }

// ---- transport ----

struct Envelope {
  std::string from, to;
  Bytes frame;
  double sent_at = 0, deliver_at = 0;
};

// Seam for swapping the in-process queue for a real network.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(Envelope e) = 0;
  virtual std::optional<Envelope> next() = 0;
  virtual double now() const = 0;
};

// Delivers in (time, seeded per-sender rank, send order). Every hop has the
// same latency, so each sender's messages arrive in the order sent.
class InProcessTransport final : public Transport {
 public:
  InProcessTransport(double latency, Rng rng) : latency_(latency), rng_(std::move(rng)) {
    enforce(latency >= 0, Errc::invalid_argument, "latency must be non-negative");
  }

  void send(Envelope e) override {
    e.sent_at = now_;
    e.deliver_at = now_ + latency_;
    auto rank = sender_rank_.find(e.from);
    if (rank == sender_rank_.end()) rank = sender_rank_.emplace(e.from, rng_.next_u64()).first;
    queue_.push({e.deliver_at, rank->second, counter_++, std::move(e)});
  }

  std::optional<Envelope> next() override {
    if (queue_.empty()) return std::nullopt;
    Item it = queue_.top();
    queue_.pop();
    now_ = std::max(now_, it.env.deliver_at);
    return std::move(it.env);
  }

  double now() const override { return now_; }

 private:
  struct Item {
    double at;
    std::uint64_t tiebreak, order;
    Envelope env;
    bool operator>(const Item& o) const {
      if (at != o.at) return at > o.at;
      if (tiebreak != o.tiebreak) return tiebreak > o.tiebreak;
      return order > o.order;
    }
  };
  double latency_;
  Rng rng_;
  double now_ = 0;
  std::uint64_t counter_ = 0;
  std::map<std::string, std::uint64_t> sender_rank_;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue_;
};

// ---- transcript ----

struct Row {
  std::uint64_t step = 0;
  double time = 0;
  std::string kind, from, to, detail;
};

struct FrameRecord {
  std::uint64_t step = 0;
  std::string from, to;
  wire::MsgType type{};
  Bytes frame;
};

struct VerifyRecord {
  TxId tx_id{};
  bool confirmed = false;
  std::optional<RejectReason> reason;
  std::optional<VerifyReport> report;
};

struct Transcript {
  std::vector<Row> rows;
  std::vector<FrameRecord> frames;
  std::vector<VerifyRecord> verifications;
  std::vector<std::string> failures;  // unmet EXPECT lines
  std::size_t expectations = 0;
  Digest final_root{};
  // Encodings of every non-genesis output opening the bank produced; used
  // to scan what reached the central bank.
  std::vector<Bytes> private_openings;
  std::set<GroupElement> used_pubkeys;
  std::map<GroupElement, std::size_t> registrations;

  bool all_expectations_met() const { return failures.empty(); }

  std::string csv() const {
    std::ostringstream os;
    os << "step,time,kind,from,to,detail\n";
    for (const auto& r : rows) os << r.step << ',' << r.time << ',' << r.kind << ',' << r.from << ',' << r.to << ",\"" << r.detail << "\"\n";
    return os.str();
  }

  std::string frame_log() const {
    std::ostringstream os;
    for (const auto& f : frames)
      os << f.step << ' ' << f.from << ' ' << f.to << ' ' << wire::type_name(f.type) << ' ' << to_hex(f.frame) << '\n';
    return os.str();
  }

  Digest digest() const {
    Sha256 h;
    h.update(csv());
    for (const auto& f : frames) h.u32(static_cast<std::uint32_t>(f.frame.size())).update(ByteView(f.frame));
    h.update(final_root);
    return h.final();
  }
};

struct BoundaryReport {
  std::size_t frames_to_central_bank = 0;
  std::size_t opening_bearing_frames = 0;  // message types that may carry openings
  std::size_t opening_matches = 0;         // byte matches of a private opening
  bool clean() const { return opening_bearing_frames == 0 && opening_matches == 0; }
};

// Every frame addressed to the central bank is decoded and byte-scanned for
// each private opening's encoding.
inline BoundaryReport scan_boundary(const Group& grp, const Transcript& t) {
  BoundaryReport rep;
  for (const auto& f : t.frames) {
    if (f.to != kCentralBank) continue;
    ++rep.frames_to_central_bank;
    auto msg = wire::decode(grp, f.frame);
    bool bearing = std::visit(
        [](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, wire::Confirmation>) return b.opening.has_value();
          else return std::is_same_v<T, wire::TxProposal> || std::is_same_v<T, wire::PaymentRequest>;
        },
        msg.body);
    if (bearing) ++rep.opening_bearing_frames;
    for (const auto& o : t.private_openings)
      if (std::search(f.frame.begin(), f.frame.end(), o.begin(), o.end()) != f.frame.end()) ++rep.opening_matches;
  }
  return rep;
}

// ---- nodes ----

// Shared plumbing: each node stamps its own role and sequence numbers.
class Node {
 public:
  using SendFn = std::function<void(const std::string& from, const std::string& to, const wire::Message&)>;
  using LogFn = std::function<void(const std::string& kind, const std::string& from, const std::string& detail)>;

  Node(std::string addr, NodeRole role, SendFn send, LogFn log)
      : addr_(std::move(addr)), role_(role), send_(std::move(send)), log_(std::move(log)) {}
  virtual ~Node() = default;

  virtual void handle(const std::string& from, const wire::Message& msg) = 0;
  const std::string& address() const { return addr_; }

 protected:
  void send(const std::string& to, wire::Body body) { send_(addr_, to, wire::Message{role_, ++seq_, std::move(body)}); }
  void log(const std::string& kind, const std::string& detail) { log_(kind, addr_, detail); }

 private:
  std::string addr_;
  NodeRole role_;
  std::uint64_t seq_ = 0;
  SendFn send_;
  LogFn log_;
};

inline std::string short_id(const Digest& d) { return to_hex(d).substr(0, 12); }

class CentralBankNode final : public Node {
 public:
  CentralBankNode(const Group& grp, Rng rng, SendFn s, LogFn l)
      : Node(kCentralBank, NodeRole::central_bank, std::move(s), std::move(l)), grp_(grp), rng_(std::move(rng)) {}

  // Genesis openings go to the bank together with their confirmations.
  void mint(const std::vector<Payout>& payouts, unsigned range_bits) {
    auto res = mint_genesis(grp_, payouts, range_bits, rng_);
    state_ = std::move(res.state);
    const auto& entry = state_->log.front();
    auto paths = confirmation_paths(grp_, entry.tx);
    for (std::uint32_t j = 0; j < entry.tx.outputs.size(); ++j)
      send(kBank, wire::Confirmation{entry.confirmation, j, entry.tx.outputs[j], paths[j], res.openings.outputs[j].second});
    log("genesis", "outputs=" + std::to_string(payouts.size()) + " tx=" + short_id(entry.confirmation.tx_id));
  }

  void handle(const std::string& from, const wire::Message& msg) override {
    const auto* sub = std::get_if<wire::SubmitTx>(&msg.body);
    if (!sub || from != kBank) {
      log("ignored", std::string(wire::type_name(msg.type())) + " from " + from);
      return;
    }
    TxId id = tx_id(grp_, sub->tx);
    ApplyOutcome out = apply_tx(*state_, grp_, sub->tx, rng_);
    if (auto* rec = std::get_if<ConfirmationRecord>(&out)) {
      records_.push_back({id, true, std::nullopt, VerifyReport{true, true, true, {}}});
      log("verify", "tx=" + short_id(id) + " payer_sig=1 range=1 balance=1 outcome=confirmed");
      auto paths = confirmation_paths(grp_, sub->tx);
      for (std::uint32_t j = 0; j < sub->tx.outputs.size(); ++j)
        send(kBank, wire::Confirmation{*rec, j, sub->tx.outputs[j], paths[j], std::nullopt});
    } else {
      const auto& rej = std::get<Rejection>(out);
      records_.push_back({id, false, rej.reason, rej.report});
      std::string flags;
      if (rej.report)
        flags = " payer_sig=" + std::to_string(rej.report->payer_sig_ok) + " range=" +
                std::to_string(rej.report->range_ok) + " balance=" + std::to_string(rej.report->balance_ok);
      log("verify", "tx=" + short_id(id) + flags + " outcome=" + std::string(reject_reason_name(rej.reason)));
      send(kBank, wire::RejectionNotice{id, rej.reason, rej.report});
    }
  }

  const GroupElement& public_key() const { return state_->cb_key.public_key; }
  const LedgerState& state() const { return *state_; }
  bool minted() const { return state_.has_value(); }
  const std::vector<VerifyRecord>& records() const { return records_; }

 private:
  const Group& grp_;
  Rng rng_;
  std::optional<LedgerState> state_;
  std::vector<VerifyRecord> records_;
};

class BankNode final : public Node {
 public:
  BankNode(const Group& grp, unsigned range_bits, GroupElement authorizer, Rng rng, SendFn s, LogFn l)
      : Node(kBank, NodeRole::bank, std::move(s), std::move(l)),
        grp_(grp),
        range_bits_(range_bits),
        rng_(std::move(rng)),
        registry_(grp, authorizer) {}

  // Account opening happens out of band.
  void register_key(const std::string& user, const GroupElement& pk, std::uint64_t index) {
    registry_.register_key(pk, user, index);
    routes_[pk] = user;
  }

  void begin_batch() { batching_ = true; }

  void end_batch() {
    batching_ = false;
    if (batch_.empty()) {
      log("batch", "empty");
      return;
    }
    std::vector<TxComponent> comps;
    for (const auto& q : batch_) comps.push_back(q.component);
    AggregateResult agg;
    try {
      agg = aggregate(grp_, comps, range_bits_, rng_);
    } catch (const Error& e) {
      log("bank-refused", std::string("aggregate: ") + e.what());
      batch_.clear();
      return;
    }
    std::map<std::uint32_t, Opening> in_open, out_open;
    for (const auto& pp : agg.packets) {
      for (const auto& [pos, o] : pp.packet.inputs) in_open[pos] = o;
      for (const auto& [pos, o] : pp.packet.outputs) out_open[pos] = o;
    }
    Group_ g;
    g.tx = agg.tx;
    for (std::uint32_t pos = 0; pos < agg.output_origin.size(); ++pos) g.output_openings.push_back(out_open[pos]);
    for (std::size_t c = 0; c < batch_.size(); ++c) {
      OpeningPacket packet;
      for (std::uint32_t pos = 0; pos < agg.input_origin.size(); ++pos)
        if (agg.input_origin[pos].first == c) packet.inputs.emplace_back(pos, in_open[pos]);
      for (std::uint32_t pos = 0; pos < agg.output_origin.size(); ++pos)
        if (agg.output_origin[pos].first == c) packet.outputs.emplace_back(pos, out_open[pos]);
      g.awaiting.insert(batch_[c].request_id);
      g.payers.insert(batch_[c].user);
      if (!packet.outputs.empty()) g.payer_output.emplace(batch_[c].user, packet.outputs.front().first);
      proposals_.push_back({batch_[c].user, batch_[c].request_id, packet});
    }
    log("batch", "components=" + std::to_string(batch_.size()) + " inputs=" + std::to_string(agg.tx.inputs.size()) +
                     " outputs=" + std::to_string(agg.tx.outputs.size()));
    std::size_t gid = groups_.size();
    groups_.push_back(std::move(g));
    for (const auto& q : batch_) request_group_[q.request_id] = gid;
    for (auto& p : proposals_) send(user_addr(p.user), wire::TxProposal{p.rid, groups_[gid].tx, p.packet});
    proposals_.clear();
    batch_.clear();
  }

  // Re-sends the last submitted transaction unchanged.
  bool replay_last() {
    if (!last_submitted_) return false;
    send(kCentralBank, wire::SubmitTx{*last_submitted_});
    return true;
  }

  void handle(const std::string& from, const wire::Message& msg) override {
    std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, wire::PaymentRequest>) on_request(from, b);
          else if constexpr (std::is_same_v<T, wire::SignedComponent>) on_signed(from, b);
          else if constexpr (std::is_same_v<T, wire::Confirmation>) on_confirmation(from, b);
          else if constexpr (std::is_same_v<T, wire::RejectionNotice>) on_rejection(from, b);
          else log("ignored", std::string(wire::type_name(msg.type())) + " from " + from);
        },
        msg.body);
  }

  const IdentityRegistry& registry() const { return registry_; }
  IdentityRegistry& registry() { return registry_; }
  const std::vector<Bytes>& private_openings() const { return private_openings_; }
  std::optional<ConcealedTx> last_confirmed_tx() const { return last_confirmed_; }

 private:
  struct ClientCoin {
    Opening opening;
    GroupElement owner;
  };
  struct Group_ {
    ConcealedTx tx;
    std::vector<Opening> output_openings;
    std::set<std::uint64_t> awaiting;
    std::set<std::string> payers;
    std::map<std::string, std::uint32_t> payer_output;  // one output each payer can open
    std::vector<std::optional<wire::Confirmation>> confirmations;
    std::set<std::string> notified;
    bool submitted = false;
    bool confirmed = false;
  };
  struct Queued {
    std::string user;
    std::uint64_t request_id;
    TxComponent component;
  };
  struct Proposal {
    std::string user;
    std::uint64_t rid;
    OpeningPacket packet;
  };

  std::optional<std::string> user_of(const std::string& addr) const {
    if (addr.rfind("user:", 0) != 0) return std::nullopt;
    return addr.substr(5);
  }

  void on_request(const std::string& from, const wire::PaymentRequest& req) {
    auto user = user_of(from);
    if (!user) return log("ignored", "payment request from " + from);
    std::vector<SpendOpening> spends;
    for (const auto& id : req.intent.spends) {
      auto it = coins_.find(id);
      // The bank keeps openings after a spend, so stale requests still get built.
      auto route = it == coins_.end() ? routes_.end() : routes_.find(it->second.owner);
      if (route == routes_.end() || route->second != *user)
        return log("bank-refused", "request " + std::to_string(req.request_id) + ": unknown coin");
      spends.push_back({{id, it->second.owner}, it->second.opening});
    }
    try {
      if (batching_) {
        auto comp = make_component(grp_, spends.front().ref.owner, spends, req.intent.payouts, range_bits_, rng_);
        batch_.push_back({*user, req.request_id, std::move(comp)});
        log("queued", "request " + std::to_string(req.request_id));
        return;
      }
      BuiltTx built = build_concealed_tx(grp_, spends, req.intent.payouts, range_bits_, rng_);
      Group_ g;
      g.tx = built.tx;
      for (const auto& [pos, o] : built.packet.outputs) g.output_openings.push_back(o);
      g.awaiting.insert(req.request_id);
      g.payers.insert(*user);
      g.payer_output.emplace(*user, 0);
      request_group_[req.request_id] = groups_.size();
      groups_.push_back(std::move(g));
      send(from, wire::TxProposal{req.request_id, built.tx, built.packet});
    } catch (const Error& e) {
      log("bank-refused", "request " + std::to_string(req.request_id) + ": " + e.what());
    }
  }

  void on_signed(const std::string& from, const wire::SignedComponent& sc) {
    auto it = request_group_.find(sc.request_id);
    if (it == request_group_.end()) return log("ignored", "signature for unknown request");
    Group_& g = groups_[it->second];
    if (g.submitted || !g.awaiting.erase(sc.request_id)) return log("ignored", "late signature from " + from);
    for (const auto& s : sc.signatures) {
      bool dup = false;
      for (const auto& have : g.tx.payer_sigs) dup |= have.pubkey == s.pubkey;
      if (!dup) g.tx.payer_sigs.push_back(s);
    }
    if (!g.awaiting.empty()) return;
    g.submitted = true;
    TxId id = tx_id(grp_, g.tx);
    by_tx_[id] = it->second;
    for (const auto& o : g.output_openings) {
      ByteWriter w;
      write(grp_, w, o);
      private_openings_.push_back(std::move(w).take());
    }
    last_submitted_ = g.tx;
    send(kCentralBank, wire::SubmitTx{g.tx});
  }

  void on_confirmation(const std::string& from, const wire::Confirmation& c) {
    if (from != kCentralBank) return log("ignored", "confirmation from " + from);
    std::optional<Opening> opening = c.opening;
    auto g = by_tx_.find(c.record.tx_id);
    Group_* grp = g == by_tx_.end() ? nullptr : &groups_[g->second];
    if (grp) {
      if (c.output_index < grp->output_openings.size()) opening = grp->output_openings[c.output_index];
      if (c.output_index == 0) last_confirmed_ = grp->tx;
      grp->confirmed = true;
    }
    if (!opening) return log("orphan-confirmation", "tx=" + short_id(c.record.tx_id));
    UtxoId id = utxo_id_for(c.record.tx_id, c.output_index);
    coins_[id] = {*opening, c.output.owner};
    wire::Confirmation fwd = c;
    fwd.opening = opening;
    auto route = routes_.find(c.output.owner);
    if (route == routes_.end()) log("orphan-confirmation", "owner not a client");
    else send(user_addr(route->second), fwd);
    if (!grp) return;
    if (route != routes_.end()) grp->notified.insert(route->second);
    // Once every output is in, payers that own none of them (no change)
    // get the receipt of one of their own payouts so they can settle.
    grp->confirmations.resize(grp->tx.outputs.size());
    if (c.output_index < grp->confirmations.size()) grp->confirmations[c.output_index] = fwd;
    for (const auto& have : grp->confirmations)
      if (!have) return;
    for (const auto& [user, pos] : grp->payer_output)
      if (grp->notified.insert(user).second) send(user_addr(user), *grp->confirmations[pos]);
  }

  void on_rejection(const std::string& from, const wire::RejectionNotice& r) {
    if (from != kCentralBank) return log("ignored", "rejection from " + from);
    auto g = by_tx_.find(r.tx_id);
    if (g == by_tx_.end()) return log("ignored", "rejection of unknown tx");
    // A replay carries the id of the original; its payers already settled.
    if (groups_[g->second].confirmed) return log("replay-rejected", "tx=" + short_id(r.tx_id));
    for (const auto& u : groups_[g->second].payers) send(user_addr(u), r);
  }

  const Group& grp_;
  unsigned range_bits_;
  Rng rng_;
  IdentityRegistry registry_;
  std::map<GroupElement, std::string> routes_;
  std::map<UtxoId, ClientCoin> coins_;
  std::vector<Group_> groups_;
  std::map<std::uint64_t, std::size_t> request_group_;
  std::map<TxId, std::size_t> by_tx_;
  std::vector<Queued> batch_;
  std::vector<Proposal> proposals_;
  bool batching_ = false;
  std::optional<ConcealedTx> last_submitted_, last_confirmed_;
  std::vector<Bytes> private_openings_;
};

enum class PayMode { honest, drop_sig, forge_sig, stale };

inline std::optional<PayMode> parse_mode(std::string_view s) {
  if (s == "drop-sig") return PayMode::drop_sig;
  if (s == "forge-sig") return PayMode::forge_sig;
  if (s == "stale") return PayMode::stale;
  return std::nullopt;
}

class UserWallet final : public Node {
 public:
  UserWallet(const Group& grp, std::string name, Rng rng, SendFn s, LogFn l)
      : Node(user_addr(name), NodeRole::user_wallet, std::move(s), std::move(l)),
        grp_(grp),
        name_(std::move(name)),
        rng_(std::move(rng)),
        master_(MasterSecret::generate(rng_)) {}

  const std::string& name() const { return name_; }

  std::pair<SchnorrKeyPair, std::uint64_t> fresh_key() {
    std::uint64_t idx = master_.counter;
    auto kp = next_keypair(grp_, master_);
    keys_.emplace(kp.public_key, kp);
    return {kp, idx};
  }

  void set_central_bank_key(const GroupElement& pk) { cb_pub_ = pk; }

  // Builds the intent and sends it; returns false if nothing was sent.
  bool pay(const GroupElement& payee, std::uint64_t amount, PayMode mode, const GroupElement& change_key,
           std::uint64_t request_id) {
    const auto& pool = mode == PayMode::stale ? spent_ : coins_;
    std::vector<UtxoId> pick;
    std::uint64_t sum = 0;
    for (const auto& [id, c] : pool) {
      if (sum >= amount && !pick.empty()) break;
      if (mode != PayMode::stale && in_flight_.count(id)) continue;
      pick.push_back(id);
      sum += c.value;
    }
    if (pick.empty() || sum < amount) {
      log(mode == PayMode::stale ? "no-stale-coin" : "insufficient-funds",
          "need " + std::to_string(amount) + " have " + std::to_string(sum));
      return false;
    }
    PaymentIntent intent{pick, {{amount, payee}}};
    if (sum > amount) intent.payouts.push_back({sum - amount, change_key});
    pending_[request_id] = {intent, mode};
    send(kBank, wire::PaymentRequest{request_id, intent});
    return true;
  }

  void handle(const std::string& from, const wire::Message& msg) override {
    if (from != kBank) return log("ignored", "message from " + from);
    if (const auto* p = std::get_if<wire::TxProposal>(&msg.body)) return on_proposal(*p);
    if (const auto* c = std::get_if<wire::Confirmation>(&msg.body)) return on_confirmation(*c);
    if (const auto* r = std::get_if<wire::RejectionNotice>(&msg.body)) return on_rejection(*r);
    log("ignored", std::string(wire::type_name(msg.type())));
  }

  std::uint64_t balance() const {
    std::uint64_t s = 0;
    for (const auto& [id, c] : coins_)
      if (!in_flight_.count(id)) s += c.value;
    return s;
  }

  std::size_t confirmations_checked() const { return checks_ok_ + checks_failed_; }
  std::size_t confirmations_failed() const { return checks_failed_; }
  const std::map<GroupElement, SchnorrKeyPair>& keys() const { return keys_; }

 private:
  struct Coin {
    OutputRecord record;
    Opening opening;
    std::uint64_t value;
  };
  struct Pending {
    PaymentIntent intent;
    PayMode mode;
  };

  void on_proposal(const wire::TxProposal& p) {
    auto it = pending_.find(p.request_id);
    if (it == pending_.end()) return log("ignored", "proposal for unknown request");
    const Pending& pend = it->second;
    if (!payer_review(grp_, p.tx, p.packet, pend.intent)) {
      log("review-failed", "request " + std::to_string(p.request_id));
      pending_.erase(it);
      return;
    }
    std::set<GroupElement> owners;
    for (const auto& [pos, o] : p.packet.inputs) owners.insert(p.tx.inputs[pos].ref.owner);
    wire::SignedComponent sc{p.request_id, {}};
    for (const auto& owner : owners) {
      if (pend.mode == PayMode::drop_sig) continue;
      if (pend.mode == PayMode::forge_sig) {
        auto other = keygen(grp_, grp_.g(), rng_);
        sc.signatures.push_back({owner, payer_sign(grp_, p.tx, other, rng_).sig});
        continue;
      }
      auto kp = keys_.find(owner);
      if (kp == keys_.end()) return log("review-failed", "input owned by a key this wallet lacks");
      sc.signatures.push_back(payer_sign(grp_, p.tx, kp->second, rng_));
    }
    TxId id = tx_id(grp_, p.tx);
    for (const auto& s : pend.intent.spends)
      if (coins_.count(s)) in_flight_[s] = id;
    pending_.erase(it);
    send(kBank, sc);
  }

  void on_confirmation(const wire::Confirmation& c) {
    bool ok = c.opening && cb_pub_ && verify_confirmation(grp_, *cb_pub_, c.output, *c.opening, c.path, c.record);
    ok ? ++checks_ok_ : ++checks_failed_;
    log("confirm-check", "tx=" + short_id(c.record.tx_id) + " index=" + std::to_string(c.output_index) +
                             " ok=" + std::to_string(ok));
    // Inputs spent by a confirmed transaction leave the wallet.
    for (auto it = in_flight_.begin(); it != in_flight_.end();) {
      if (it->second == c.record.tx_id) {
        spent_[it->first] = coins_.at(it->first);
        coins_.erase(it->first);
        it = in_flight_.erase(it);
      } else {
        ++it;
      }
    }
    if (!ok || !keys_.count(c.output.owner)) return;
    const auto& v = c.opening->value.value();
    coins_[utxo_id_for(c.record.tx_id, c.output_index)] = {c.output, *c.opening, v.get_ui()};
  }

  void on_rejection(const wire::RejectionNotice& r) {
    log("rejected", "tx=" + short_id(r.tx_id) + " reason=" + std::string(reject_reason_name(r.reason)));
    for (auto it = in_flight_.begin(); it != in_flight_.end();)
      it = it->second == r.tx_id ? in_flight_.erase(it) : std::next(it);
  }

  const Group& grp_;
  std::string name_;
  Rng rng_;
  MasterSecret master_;
  std::optional<GroupElement> cb_pub_;
  std::map<GroupElement, SchnorrKeyPair> keys_;
  std::map<UtxoId, Coin> coins_, spent_;
  std::map<UtxoId, TxId> in_flight_;
  std::map<std::uint64_t, Pending> pending_;
  std::size_t checks_ok_ = 0, checks_failed_ = 0;
};

// ---- script ----
//
//   USER name
//   MINT name amount
//   PAY payer payee amount [drop-sig | forge-sig | stale]
//   BATCH BEGIN | BATCH END
//   REPLAY
//   EXPECT-CONFIRM
//   EXPECT-REJECT unknown-input | verify-failed | duplicate-tx-id
//   EXPECT-BALANCE name amount
//   EXPECT-ANONYMITY k
//
// '#' starts a comment.

struct Command {
  std::size_t line = 0;
  std::vector<std::string> words;
};

inline std::vector<Command> parse_script(std::string_view text) {
  std::vector<Command> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  auto need = [&](const Command& c, std::size_t k) {
    enforce(c.words.size() == k, Errc::script_error,
            "line " + std::to_string(c.line) + ": " + c.words[0] + " takes " + std::to_string(k - 1) + " arguments");
  };
  auto number = [&](const Command& c, const std::string& w) {
    enforce(!w.empty() && w.find_first_not_of("0123456789") == std::string::npos && w.size() <= 19,
            Errc::script_error, "line " + std::to_string(c.line) + ": bad number '" + w + "'");
  };
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Command c{n, {}};
    for (std::string w; ls >> w;) c.words.push_back(w);
    if (c.words.empty()) continue;
    const auto& op = c.words[0];
    if (op == "USER" || op == "EXPECT-ANONYMITY") {
      need(c, 2);
      if (op == "EXPECT-ANONYMITY") number(c, c.words[1]);
    } else if (op == "MINT" || op == "EXPECT-BALANCE") {
      need(c, 3);
      number(c, c.words[2]);
    } else if (op == "PAY") {
      enforce(c.words.size() == 4 || c.words.size() == 5, Errc::script_error,
              "line " + std::to_string(n) + ": PAY payer payee amount [mode]");
      number(c, c.words[3]);
      if (c.words.size() == 5)
        enforce(parse_mode(c.words[4]).has_value(), Errc::script_error,
                "line " + std::to_string(n) + ": unknown mode '" + c.words[4] + "'");
    } else if (op == "BATCH") {
      need(c, 2);
      enforce(c.words[1] == "BEGIN" || c.words[1] == "END", Errc::script_error,
              "line " + std::to_string(n) + ": BATCH BEGIN or BATCH END");
    } else if (op == "REPLAY" || op == "EXPECT-CONFIRM") {
      need(c, 1);
    } else if (op == "EXPECT-REJECT") {
      need(c, 2);
      enforce(c.words[1] == "unknown-input" || c.words[1] == "verify-failed" || c.words[1] == "duplicate-tx-id",
              Errc::script_error, "line " + std::to_string(n) + ": unknown reason '" + c.words[1] + "'");
    } else {
      fail(Errc::script_error, "line " + std::to_string(n) + ": unknown command '" + op + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct ScenarioConfig {
  std::uint64_t seed = 1;
  unsigned range_bits = 0;  // 0 selects the group default
  double latency = 0;
};

class Runner {
 public:
  Runner(const Group& grp, const ScenarioConfig& cfg)
      : grp_(grp),
        cfg_(cfg),
        root_rng_(cfg.seed),
        range_bits_(cfg.range_bits ? cfg.range_bits : default_range_bits(grp)),
        transport_(std::make_unique<InProcessTransport>(cfg.latency, root_rng_.split(3))) {
    validate_range_bits(grp_, range_bits_);
    Rng auth_rng = root_rng_.split(4);
    authorizer_ = keygen(grp_, grp_.g(), auth_rng);
    cb_ = std::make_unique<CentralBankNode>(grp_, root_rng_.split(1), sender(), logger());
    bank_ = std::make_unique<BankNode>(grp_, range_bits_, authorizer_.public_key, root_rng_.split(2), sender(), logger());
  }

  Transcript run(std::string_view script) {
    auto commands = parse_script(script);
    for (const auto& c : commands) {
      const auto& op = c.words[0];
      if (op != "USER" && op != "MINT") ensure_genesis();
      row("command", "script", "", join(c.words));
      execute(c);
      pump();
    }
    ensure_genesis();
    pump();
    finish();
    return std::move(t_);
  }

  const BankNode& bank() const { return *bank_; }
  BankNode& bank() { return *bank_; }
  const CentralBankNode& central_bank() const { return *cb_; }
  const SchnorrKeyPair& authorizer() const { return authorizer_; }
  UserWallet& wallet(const std::string& name) { return user(name); }

 private:
  Node::SendFn sender() {
    return [this](const std::string& from, const std::string& to, const wire::Message& m) {
      Bytes frame = wire::encode(grp_, m);
      t_.frames.push_back({step_, from, to, m.type(), frame});
      row("send", from, to, std::string(wire::type_name(m.type())) + " seq=" + std::to_string(m.seq) +
                                " bytes=" + std::to_string(frame.size()));
      transport_->send({from, to, std::move(frame), 0, 0});
    };
  }

  Node::LogFn logger() {
    return [this](const std::string& kind, const std::string& from, const std::string& detail) {
      row(kind, from, "", detail);
    };
  }

  void row(std::string kind, std::string from, std::string to, std::string detail) {
    t_.rows.push_back({step_++, transport_->now(), std::move(kind), std::move(from), std::move(to), std::move(detail)});
  }

  static std::string join(const std::vector<std::string>& w) {
    std::string s;
    for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
    return s;
  }

  UserWallet& user(const std::string& name) {
    auto it = users_.find(name);
    if (it == users_.end()) {
      auto w = std::make_unique<UserWallet>(grp_, name, root_rng_.split(100 + users_.size()), sender(), logger());
      if (cb_->minted()) w->set_central_bank_key(cb_->public_key());
      it = users_.emplace(name, std::move(w)).first;
    }
    return *it->second;
  }

  GroupElement fresh_key(UserWallet& w) {
    auto [kp, idx] = w.fresh_key();
    bank_->register_key(w.name(), kp.public_key, idx);
    ++t_.registrations[kp.public_key];
    return kp.public_key;
  }

  void ensure_genesis() {
    if (cb_->minted()) return;
    std::vector<Payout> payouts;
    for (const auto& [name, amount] : mints_) {
      auto pk = fresh_key(user(name));
      t_.used_pubkeys.insert(pk);
      payouts.push_back({amount, pk});
    }
    cb_->mint(payouts, range_bits_);
    for (auto& [n, w] : users_) w->set_central_bank_key(cb_->public_key());
    pump();
  }

  void execute(const Command& c) {
    const auto& w = c.words;
    const auto& op = w[0];
    if (op == "USER") {
      user(w[1]);
    } else if (op == "MINT") {
      enforce(!cb_->minted(), Errc::script_error, "line " + std::to_string(c.line) + ": MINT after genesis");
      user(w[1]);
      mints_.emplace_back(w[1], std::stoull(w[2]));
    } else if (op == "PAY") {
      auto mode = w.size() == 5 ? *parse_mode(w[4]) : PayMode::honest;
      auto& payer = user(w[1]);
      auto& payee = user(w[2]);
      auto to = fresh_key(payee);
      auto change = fresh_key(payer);
      t_.used_pubkeys.insert(to);
      t_.used_pubkeys.insert(change);
      payer.pay(to, std::stoull(w[3]), mode, change, ++request_id_);
    } else if (op == "BATCH") {
      w[1] == "BEGIN" ? bank_->begin_batch() : bank_->end_batch();
    } else if (op == "REPLAY") {
      if (!bank_->replay_last()) row("replay", kBank, "", "nothing submitted yet");
    } else {
      expect(c);
    }
  }

  void expect(const Command& c) {
    const auto& w = c.words;
    ++t_.expectations;
    std::string why;
    const auto& recs = cb_->records();
    const VerifyRecord* last = recs.empty() ? nullptr : &recs.back();
    if (w[0] == "EXPECT-CONFIRM") {
      if (!last || !last->confirmed || last_checked_ == recs.size()) why = "last submission was not confirmed";
      else {
        std::size_t failed = 0, checked = 0;
        for (const auto& [n, u] : users_) failed += u->confirmations_failed(), checked += u->confirmations_checked();
        if (failed) why = "a recipient failed verify_confirmation";
        else if (checked == 0) why = "no recipient checked a confirmation";
      }
    } else if (w[0] == "EXPECT-REJECT") {
      if (!last || last->confirmed || last_checked_ == recs.size()) why = "last submission was not rejected";
      else if (reject_reason_name(*last->reason) != w[1])
        why = "rejected with " + std::string(reject_reason_name(*last->reason));
    } else if (w[0] == "EXPECT-BALANCE") {
      auto have = user(w[1]).balance();
      if (have != std::stoull(w[2])) why = w[1] + " holds " + std::to_string(have);
    } else if (w[0] == "EXPECT-ANONYMITY") {
      auto tx = bank_->last_confirmed_tx();
      std::size_t k = tx ? anonymity_of(*tx) : 0;
      if (k != std::stoull(w[1])) why = "anonymity is " + std::to_string(k);
    }
    if (w[0] == "EXPECT-CONFIRM" || w[0] == "EXPECT-REJECT") last_checked_ = recs.size();
    std::string text = "line " + std::to_string(c.line) + ": " + join(w);
    if (why.empty()) {
      row("expect", "script", "", "pass " + join(w));
    } else {
      row("expect", "script", "", "FAIL " + join(w) + " (" + why + ")");
      t_.failures.push_back(text + " (" + why + ")");
    }
  }

  void pump() {
    while (auto env = transport_->next()) {
      auto msg = wire::decode(grp_, env->frame);
      row("deliver", env->from, env->to, std::string(wire::type_name(msg.type())) + " seq=" + std::to_string(msg.seq));
      node(env->to).handle(env->from, msg);
    }
  }

  Node& node(const std::string& addr) {
    if (addr == kBank) return *bank_;
    if (addr == kCentralBank) return *cb_;
    return user(addr.substr(5));
  }

  void finish() {
    const auto& log = cb_->state().log;
    std::vector<Digest> ids;
    for (const auto& e : log) ids.push_back(e.confirmation.tx_id);
    t_.final_root = merkle_root(ids);
    t_.verifications = cb_->records();
    t_.private_openings = bank_->private_openings();
    row("final", kCentralBank, "", "ledger_root=" + to_hex(t_.final_root) + " entries=" + std::to_string(log.size()));
  }

  const Group& grp_;
  ScenarioConfig cfg_;
  Rng root_rng_;
  unsigned range_bits_;
  std::unique_ptr<Transport> transport_;
  SchnorrKeyPair authorizer_;
  std::unique_ptr<CentralBankNode> cb_;
  std::unique_ptr<BankNode> bank_;
  std::map<std::string, std::unique_ptr<UserWallet>> users_;
  std::vector<std::pair<std::string, std::uint64_t>> mints_;
  std::uint64_t request_id_ = 0;
  std::uint64_t step_ = 0;
  std::size_t last_checked_ = 0;
  Transcript t_;
};

inline Transcript run_scenario(const Group& grp, const ScenarioConfig& cfg, std::string_view script) {
  return Runner(grp, cfg).run(script);
}

}  // namespace rcbdc::scenario
