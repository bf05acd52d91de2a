#include "gdb/threat.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "gdb/errors.hpp"

namespace gdb::threat {

PolicyState::PolicyState(const NodeSpec &spec, std::uint64_t seed)
    : node(spec.id), role(spec.role), policy(spec.policy), rng(Rng::derive(seed, 0x901C, spec.id.value)) {}

void PolicyState::begin_session(std::uint32_t rounds) {
  early_rounds.clear();
  pending_mask = 0.0;
  if (const auto *e = std::get_if<policy::EarlyChallenge>(&policy)) {
    const auto k = static_cast<std::uint32_t>(std::llround(e->pr_ch * rounds));
    if (k == 0) return;
    std::vector<std::uint32_t> all(rounds);
    for (std::uint32_t i = 0; i < rounds; ++i) all[i] = i + 1;
    rng.shuffle(all);
    early_rounds.insert(all.begin(), all.begin() + k);
  }
}

namespace {

using simkit::MsgKind;
using simkit::Phase;

struct Apply {
  PolicyState &st;
  PendingSend &s;

  void operator()(const policy::Honest &) {}
  void operator()(const policy::NodeInsertion &) {}
  void operator()(const policy::FakeLocationReport &) {}
  void operator()(const policy::Relay &) {}

  void operator()(const policy::SelectiveDelay &d) {
    if (s.body.phase != Phase::Rapid) return;
    double extra = d.all_s;
    for (const auto &[ordinal, delay] : d.per_message) {
      if (ordinal == s.rapid_ordinal) extra += delay;
    }
    if (s.body.to) {
      for (const auto &[target, delay] : d.per_target) {
        if (target == *s.body.to) extra += delay;
      }
    }
    s.t_send += extra;
  }

  void operator()(const policy::GuessAhead &g) {
    if (is_verifier(st.role)) throw Error(ErrorCode::PolicyInapplicable, "GuessAhead acts for provers only");
    if (s.body.phase != Phase::Rapid || s.body.kind != MsgKind::Response || !s.trigger_arrival) return;
    if (!s.nonce) throw Error(ErrorCode::PolicyInapplicable, "GuessAhead needs the responder nonce");
    if (g.rounds && s.round > *g.rounds) return;
    // The challenge is unknown when the answer leaves, so guess it.
    const auto guess = BitString::random(s.nonce->size(), st.rng);
    s.body.bits = response_bits(guess, *s.nonce);
    const double advance = g.advance_s.value_or(s.trigger_flight.value_or(0.0));
    s.t_send -= advance;
    s.bypass_causality = true;
  }

  void operator()(const policy::EarlyChallenge &e) {
    if (st.role == Role::Prover) throw Error(ErrorCode::PolicyInapplicable, "EarlyChallenge acts for verifiers only");
    // A peer playing prover in a mixed protocol leaves its responses alone.
    if (s.body.phase != Phase::Rapid || s.body.kind == MsgKind::Response) return;
    // Hide the previous lead by holding this emission back by the same amount.
    s.t_send += st.pending_mask;
    st.pending_mask = 0.0;
    if (s.body.kind == MsgKind::Challenge && st.early_rounds.count(s.round)) {
      s.body.lead_s = e.advance_s;
      st.pending_mask = e.advance_s;
    }
  }
};

} // namespace

PendingSend apply_policy(PolicyState &state, PendingSend send) {
  std::visit(Apply{state, send}, state.policy);
  return send;
}

PendingSend relay_forward(const policy::Relay &relay, NodeId verifier, const simkit::Emission &incoming,
                          double arrival, double alpha) {
  PendingSend out;
  out.body = incoming.payload;
  out.body.to = incoming.sender == verifier ? relay.victim : verifier;
  out.t_send = arrival + alpha;
  out.trigger_arrival = arrival;
  return out;
}

Position advertised_position(const NodeSpec &va) {
  if (const auto *f = std::get_if<policy::FakeLocationReport>(&va.policy)) {
    if (f->claimed_pos) return *f->claimed_pos;
  }
  return va.pos;
}

double advertised_distance(const NodeSpec &va, Position vp) {
  double d = distance(advertised_position(va), vp);
  if (const auto *f = std::get_if<policy::FakeLocationReport>(&va.policy)) d += f->distance_offset_m;
  return std::max(d, 0.0);
}

DetectionReport cross_check_detect(const std::vector<NodeReport> &reports, double eps_detect, double residual_tol) {
  DetectionReport out;
  std::map<NodeId, const NodeReport *> by_node;
  for (const auto &r : reports) {
    by_node[r.node] = &r;
    out.verdict[r.node] = "consistent";
  }

  for (const auto &[x, rx] : by_node) {
    for (const auto &[y, bx] : rx->db) {
      if (!(x < y)) continue;
      auto it = by_node.find(y);
      if (it == by_node.end()) continue;
      auto jt = it->second->db.find(x);
      if (jt == it->second->db.end()) continue;
      const double diff = std::abs(bx - jt->second);
      if (diff > eps_detect) {
        out.evidence.push_back(Evidence{NodePair{x, y}, bx, jt->second, diff});
        out.verdict[x] = "disagrees on a shared bound";
        out.verdict[y] = "disagrees on a shared bound";
      }
    }
  }

  for (const auto &r : reports) {
    if (r.residual > residual_tol) out.alarms[r.node] = r.residual;
  }

  std::map<crypto::Digest, std::size_t> votes;
  for (const auto &r : reports) ++votes[r.transcript];
  if (votes.size() > 1) {
    auto majority = std::max_element(votes.begin(), votes.end(), [](auto &a, auto &b) { return a.second < b.second; });
    for (const auto &r : reports) {
      if (r.transcript != majority->first) {
        out.accused.insert(r.node);
        out.verdict[r.node] = "transcript digest differs from majority";
      }
    }
  }
  return out;
}

void write_detection_json(const DetectionReport &r, std::ostream &out) {
  using nlohmann::json;
  json ev = json::array();
  for (const auto &e : r.evidence) {
    ev.push_back({{"pair", {e.pair.a.value, e.pair.b.value}},
                  {"bound_a_m", e.bound_a},
                  {"bound_b_m", e.bound_b},
                  {"discrepancy_m", e.discrepancy}});
  }
  json accused = json::array();
  for (auto id : r.accused) accused.push_back(id.value);
  json verdict = json::object();
  for (const auto &[id, v] : r.verdict) verdict[std::to_string(id.value)] = v;
  json alarms = json::object();
  for (const auto &[id, res] : r.alarms) alarms[std::to_string(id.value)] = res;
  json j = {{"detected", !r.empty()}, {"accused", accused}, {"evidence", ev}, {"verdict", verdict}, {"alarms", alarms}};
  out << j.dump(2) << '\n';
}

} // namespace gdb::threat
