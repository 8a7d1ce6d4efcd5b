#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <mutex>
#include <set>
#include <variant>
#include <vector>

#include "rcbdc/tx.hpp"

namespace rcbdc {

// One payer's balanced transfer, as held by the bank before aggregation.
struct TxComponent {
  GroupElement payer;
  std::vector<SpendOpening> inputs;
  std::vector<OwnedOutput> outputs;

  Scalar alpha(const Group& grp) const {
    Scalar a = grp.scalar(0L);
    for (const auto& i : inputs) a = grp.add(a, i.opening.randomness);
    for (const auto& o : outputs) a = grp.sub(a, o.opening.randomness);
    return a;
  }
};

inline TxComponent make_component(const Group& grp, const GroupElement& payer, std::vector<SpendOpening> spends,
                                  const std::vector<Payout>& payouts, unsigned n_bits, Rng& rng) {
  validate_range_bits(grp, n_bits);
  enforce(!spends.empty() && !payouts.empty(), Errc::invalid_argument, "component needs inputs and outputs");
  mpz_class in_sum = 0, out_sum = 0;
  for (const auto& s : spends) in_sum += s.opening.value.value();
  TxComponent c{payer, std::move(spends), {}};
  for (const auto& p : payouts) {
    enforce(mpz_class(static_cast<unsigned long>(p.value)) < (mpz_class(1) << n_bits), Errc::value_out_of_range,
            "payout exceeds 2^n");
    out_sum += static_cast<unsigned long>(p.value);
    c.outputs.push_back({p, {detail::scalar_of(grp, p.value), grp.random_scalar(rng)}});
  }
  enforce(in_sum == out_sum, Errc::unbalanced_amounts, "component does not balance");
  return c;
}

struct PayerPacket {
  GroupElement payer;
  OpeningPacket packet;
};

struct AggregateResult {
  ConcealedTx tx;
  std::vector<PayerPacket> packets;  // one per distinct payer, first-appearance order
  // Bank-side record of the shuffle: aggregate position -> (component, index).
  std::vector<std::pair<std::size_t, std::size_t>> input_origin, output_origin;
};

// Concatenates all components, shuffles inputs and outputs (seeded), and
// signs once with alpha = sum of component alphas. Range proofs are
// regenerated for the aggregate's commitments.
inline AggregateResult aggregate(const Group& grp, std::vector<TxComponent> components, unsigned n_bits, Rng& rng) {
  enforce(!components.empty(), Errc::empty_batch, "nothing to aggregate");

  std::vector<std::pair<std::size_t, std::size_t>> in_slots, out_slots;
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (std::size_t i = 0; i < components[c].inputs.size(); ++i) in_slots.emplace_back(c, i);
    for (std::size_t j = 0; j < components[c].outputs.size(); ++j) out_slots.emplace_back(c, j);
  }
  auto shuffle = [&](auto& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(std::uint64_t{i})]);
  };
  shuffle(in_slots);
  shuffle(out_slots);

  std::vector<SpendOpening> spends;
  for (auto [c, i] : in_slots) spends.push_back(components[c].inputs[i]);
  std::vector<OwnedOutput> outs;
  for (auto [c, j] : out_slots) outs.push_back(components[c].outputs[j]);

  BuiltTx built = detail::assemble_tx(grp, spends, std::move(outs), n_bits, rng);

  AggregateResult res;
  res.tx = std::move(built.tx);
  res.input_origin = in_slots;
  res.output_origin = out_slots;

  auto packet_for = [&](const GroupElement& payer) -> OpeningPacket& {
    for (auto& pp : res.packets)
      if (pp.payer == payer) return pp.packet;
    res.packets.push_back({payer, {}});
    return res.packets.back().packet;
  };
  for (const auto& comp : components) packet_for(comp.payer);
  // assemble_tx may have resampled the last output; take openings from its packet.
  for (std::uint32_t pos = 0; pos < in_slots.size(); ++pos)
    packet_for(components[in_slots[pos].first].payer).inputs.emplace_back(pos, built.packet.inputs[pos].second);
  for (std::uint32_t pos = 0; pos < out_slots.size(); ++pos)
    packet_for(components[out_slots[pos].first].payer).outputs.emplace_back(pos, built.packet.outputs[pos].second);
  return res;
}

// What the bank sends a payer for review: the openings of that payer's inputs
// and intended outputs inside the aggregate.
struct PayerView {
  GroupElement payer;
  OpeningPacket packet;
};

inline PayerView extract_view(const AggregateResult& agg, const GroupElement& payer) {
  for (const auto& pp : agg.packets)
    if (pp.payer == payer) return {payer, pp.packet};
  fail(Errc::unknown_payer, "payer has no component in this batch");
}

struct AnonymityOptions {
  bool count_change_as_payee = true;
  // Output owners known to be change; ignored unless count_change_as_payee is false.
  std::set<GroupElement> change_owners;
};

// min(distinct input owners, distinct output owners)
inline std::size_t anonymity_of(const ConcealedTx& tx, const AnonymityOptions& opt = {}) {
  std::set<GroupElement> payers, payees;
  for (const auto& in : tx.inputs) payers.insert(in.ref.owner);
  for (const auto& out : tx.outputs)
    if (opt.count_change_as_payee || !opt.change_owners.count(out.owner)) payees.insert(out.owner);
  return std::min(payers.size(), payees.size());
}

// ---- batching ----

struct FixedWindow {
  double period;
};
struct Threshold {
  std::size_t k_min;
  double timeout;
};
using BatchPolicy = std::variant<FixedWindow, Threshold>;

inline void validate_policy(const BatchPolicy& p) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FixedWindow>)
          enforce(v.period > 0, Errc::invalid_argument, "window period must be positive");
        else
          enforce(v.k_min > 0 && v.timeout > 0, Errc::invalid_argument, "threshold parameters must be positive");
      },
      p);
}

enum class FlushTrigger { none, window, threshold, timeout };

struct FlushDecision {
  FlushTrigger trigger = FlushTrigger::none;
  std::vector<TxComponent> components;
  std::size_t distinct_payers = 0;

  bool flushed() const { return trigger != FlushTrigger::none; }
};

// Many producers may submit concurrently; one consumer polls and aggregates
// whatever a flush returns. Times are in caller-defined units.
class Batcher {
 public:
  Batcher(BatchPolicy policy, double now) : policy_(policy), window_opened_at_(now) { validate_policy(policy_); }

  FlushDecision submit(TxComponent c, double now) {
    std::lock_guard lock(mu_);
    if (queue_.empty() && std::holds_alternative<Threshold>(policy_)) window_opened_at_ = now;
    queue_.push_back(std::move(c));
    if (auto* t = std::get_if<Threshold>(&policy_); t && distinct_payers_locked() >= t->k_min)
      return flush_locked(FlushTrigger::threshold, now);
    return {};
  }

  FlushDecision poll(double now) {
    std::lock_guard lock(mu_);
    if (auto* w = std::get_if<FixedWindow>(&policy_)) {
      if (now < window_opened_at_ + w->period) return {};
      return flush_locked(FlushTrigger::window, now);
    }
    const auto& t = std::get<Threshold>(policy_);
    if (queue_.empty() || now < window_opened_at_ + t.timeout) return {};
    return flush_locked(FlushTrigger::timeout, now);
  }

  double window_opened_at() const {
    std::lock_guard lock(mu_);
    return window_opened_at_;
  }
  std::size_t pending() const {
    std::lock_guard lock(mu_);
    return queue_.size();
  }
  const BatchPolicy& policy() const { return policy_; }

 private:
  std::size_t distinct_payers_locked() const {
    std::set<GroupElement> s;
    for (const auto& c : queue_) s.insert(c.payer);
    return s.size();
  }

  FlushDecision flush_locked(FlushTrigger why, double now) {
    FlushDecision d;
    d.trigger = why;
    d.distinct_payers = distinct_payers_locked();
    d.components.assign(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
    queue_.clear();
    if (auto* w = std::get_if<FixedWindow>(&policy_)) {
      while (window_opened_at_ + w->period <= now) window_opened_at_ += w->period;
    } else {
      window_opened_at_ = now;
    }
    return d;
  }

  BatchPolicy policy_;
  mutable std::mutex mu_;
  std::deque<TxComponent> queue_;
  double window_opened_at_;
};

}  // namespace rcbdc
