#include "gdb/proto.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <string>

#include "gdb/errors.hpp"

namespace gdb::proto {

std::string_view to_string(Method m) {
  switch (m) {
  case Method::Active: return "Active";
  case Method::Passive: return "Passive";
  case Method::MultiParty: return "MultiParty";
  }
  return "?";
}

const DbEstimate *RunResult::find(NodeId measurer, NodeId target) const {
  for (const auto &e : estimates) {
    if (e.measurer == measurer && e.target == target) return &e;
  }
  return nullptr;
}

RingOrder ring_order(const std::vector<NodeId> &nodes, const std::map<NodeId, crypto::Commitment> &commitments) {
  std::vector<std::pair<crypto::Digest, NodeId>> keyed;
  for (NodeId id : nodes) {
    auto it = commitments.find(id);
    if (it == commitments.end()) {
      throw Error(ErrorCode::MissingCommitment, "no commitment from node " + std::to_string(id.value));
    }
    keyed.emplace_back(crypto::hash(std::span<const std::uint8_t>(it->second.digest)), id);
  }
  std::sort(keyed.begin(), keyed.end());
  RingOrder out;
  for (auto &[_, id] : keyed) out.push_back(id);
  return out;
}

namespace {

using simkit::ArrivalRecord;
using simkit::Emission;
using simkit::MessageBody;
using simkit::MsgKind;
using simkit::Phase;
using simkit::Simulator;

std::string node_str(NodeId id) { return "node " + std::to_string(id.value); }

std::vector<std::pair<NodeId, Position>> placements(const Scenario &s) {
  std::vector<std::pair<NodeId, Position>> out;
  for (const auto &n : s.nodes) out.emplace_back(n.id, n.pos);
  return out;
}

struct DecommitContent {
  NodeId owner;
  crypto::Opening opening;
  crypto::PublicKey pub{};
  std::optional<crypto::Signature> sig;
};

void append(std::vector<std::uint8_t> &out, std::span<const std::uint8_t> bytes) {
  out.insert(out.end(), bytes.begin(), bytes.end());
}

/// Shared state of one simulated run: channel, keys, policies and the
/// structured content of commit/decommit messages keyed by emission.
class Network {
public:
  explicit Network(const Scenario &s) : sc(s), sim(placements(s), s.config.c, s.rng_seed) {
    for (const auto &n : s.nodes) {
      auto kr = Rng::derive(s.rng_seed, 0x4B45, n.id.value);
      keys[n.id] = registry.issue(n.id, kr, n.has_cert);
      policies[n.id] = threat::PolicyState(n, s.rng_seed);
      nonce_rngs.emplace(n.id, Rng::derive(s.rng_seed, 0x0CE, n.id.value));
    }
  }

  double alpha() const { return sc.config.alpha; }
  double c() const { return sc.config.c; }

  const Emission &send(NodeId sender, threat::PendingSend ps) {
    if (ps.body.phase == Phase::Rapid) ps.rapid_ordinal = ++rapid_ordinal;
    ps = threat::apply_policy(policies.at(sender), std::move(ps));
    if (ps.bypass_causality) return sim.schedule_broadcast_unchecked(sender, std::move(ps.body), ps.t_send);
    return sim.schedule_broadcast(sender, std::move(ps.body), ps.t_send);
  }

  std::vector<BitString> draw_nonces(NodeId who, std::size_t count) {
    std::vector<BitString> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(BitString::random(sc.config.bit_len, nonce_rngs.at(who)));
    return out;
  }

  /// (C - 2) certificate messages followed by the commitment.
  void emit_commit(NodeId who, const crypto::Commitment &cm, std::optional<NodeId> to, std::uint32_t session, double t) {
    for (std::uint32_t j = 0; j + 2 < sc.config.pre_post_msgs; ++j) {
      MessageBody cert{MsgKind::Cert, Phase::Pre, who, to, session, j + 1, {}, {}, 0.0};
      append(cert.blob, keys.at(who).pub);
      sim.schedule_broadcast(who, std::move(cert), t);
    }
    MessageBody body{MsgKind::Commit, Phase::Pre, who, to, session, 0, {}, {}, 0.0};
    append(body.blob, cm.digest);
    const auto &e = sim.schedule_broadcast(who, std::move(body), t);
    commits[e.seq] = cm;
  }

  const Emission &emit_decommit(NodeId who, const crypto::Opening &op, const crypto::Digest &transcript,
                                std::optional<NodeId> to, std::uint32_t session, double t) {
    DecommitContent content{who, op, keys.at(who).pub, std::nullopt};
    if (sc.config.auth_enabled) content.sig = registry.sign(keys.at(who), transcript);
    MessageBody body{MsgKind::Decommit, Phase::Post, who, to, session, 0, op.bits, {}, 0.0};
    append(body.blob, op.blinding);
    append(body.blob, content.pub);
    if (content.sig) append(body.blob, *content.sig);
    const auto &e = sim.schedule_broadcast(who, std::move(body), t);
    decommits[e.seq] = std::move(content);
    return e;
  }

  /// Copies structured content when a relay re-emits a message.
  void mirror(std::uint64_t from, std::uint64_t to) {
    if (auto it = commits.find(from); it != commits.end()) commits[to] = it->second;
    if (auto it = decommits.find(from); it != decommits.end()) decommits[to] = it->second;
  }

  /// Throws AuthFailure unless `d` carries a certified signature of `signer`
  /// over `transcript`.
  void check_signature(NodeId signer, const DecommitContent &d, const crypto::Digest &transcript) const {
    if (!d.sig) throw Error(ErrorCode::AuthFailure, node_str(signer) + " sent no transcript signature");
    bool ok = false;
    try {
      ok = registry.verify(d.pub, transcript, *d.sig);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::UnknownKey) throw;
      throw Error(ErrorCode::AuthFailure, node_str(signer) + " signs with an uncertified key");
    }
    const auto owner = registry.owner_of(d.pub);
    if (!ok || !owner || *owner != signer) {
      throw Error(ErrorCode::AuthFailure, "transcript signature of " + node_str(signer) + " does not verify");
    }
  }

  const Scenario &sc;
  Simulator sim;
  crypto::KeyRegistry registry;
  std::map<NodeId, crypto::KeyPair> keys;
  std::map<NodeId, threat::PolicyState> policies;
  std::map<NodeId, Rng> nonce_rngs;
  std::map<std::uint64_t, crypto::Commitment> commits;
  std::map<std::uint64_t, DecommitContent> decommits;
  std::uint32_t rapid_ordinal = 0;
  std::uint32_t next_session = 1;
};

double rtt_bound(double t_send, double t_recv, double alpha, double c) {
  return std::max(0.0, ((t_recv - t_send) - alpha) / 2.0 * c);
}

// ---------------------------------------------------------------------------
// One-way sessions

struct PassiveTimes {
  std::optional<double> t1, t2, t3;
};

struct SessionSpec {
  NodeId verifier;
  NodeId prover;
  std::optional<NodeId> relay;
  std::uint32_t rounds = 1;
  bool trailing_ack = false;
  std::vector<NodeId> observers;
};

struct SessionOutcome {
  DbEstimate active;
  std::map<NodeId, std::vector<PassiveTimes>> passive;
};

crypto::Digest session_transcript(std::uint32_t sid, const std::vector<BitString> &ch, const std::vector<BitString> &rs) {
  crypto::Hasher h;
  h.add("gdb.oneway").add(static_cast<std::uint64_t>(sid));
  for (std::size_t i = 0; i < ch.size(); ++i) h.add(ch[i]).add(rs[i]);
  return h.finish();
}

SessionOutcome run_session(Network &net, const SessionSpec &sp) {
  const std::uint32_t sid = net.next_session++;
  const auto &cfg = net.sc.config;
  const NodeId V = sp.verifier;
  const NodeId P = sp.prover;
  const NodeId v_partner = sp.relay.value_or(P);
  const NodeId p_partner = sp.relay.value_or(V);
  const double alpha = net.alpha();
  const std::uint32_t n = sp.rounds;

  auto nonces = net.draw_nonces(P, n);
  auto [commitment, opening] = crypto::commit(concat(nonces), net.nonce_rngs.at(P));
  net.policies.at(V).begin_session(n);
  net.policies.at(P).begin_session(n);

  struct {
    std::optional<crypto::Commitment> commitment;
    std::vector<BitString> challenges, responses, p_challenges, p_responses;
    std::vector<double> t_send, t_recv;
    std::vector<bool> got;
    std::optional<DecommitContent> decommit;
  } st;
  st.challenges.resize(n);
  st.responses.resize(n);
  st.p_challenges.resize(n);
  st.p_responses.resize(n);
  st.t_send.assign(n, 0.0);
  st.t_recv.assign(n, 0.0);
  st.got.assign(n, false);

  SessionOutcome out;
  const std::set<NodeId> observers(sp.observers.begin(), sp.observers.end());
  for (NodeId o : observers) out.passive[o].resize(n);

  auto send_challenge = [&](std::uint32_t i, double t) {
    BitString c = BitString::random(cfg.bit_len, net.nonce_rngs.at(V));
    threat::PendingSend ps;
    ps.body = MessageBody{MsgKind::Challenge, Phase::Rapid, V, v_partner, sid, i, c, {}, 0.0};
    ps.t_send = t;
    ps.round = i;
    const auto &e = net.send(V, std::move(ps));
    st.challenges[i - 1] = c;
    st.t_send[i - 1] = net.sim.local(V, e.t_send);
  };

  auto handler = [&](Simulator &sim, const Emission &e, const ArrivalRecord &a) {
    const auto &b = e.payload;
    if (b.session != sid) return;
    const NodeId r = a.receiver;
    const double t = a.t_arrive;

    if (observers.count(r) && b.phase == Phase::Rapid) {
      auto &times = out.passive[r];
      const double local = sim.local(r, t);
      if (e.sender == V && b.kind == MsgKind::Challenge) {
        if (!times[b.index - 1].t1) times[b.index - 1].t1 = local;
        if (b.index > 1 && !times[b.index - 2].t3) times[b.index - 2].t3 = local;
      } else if (e.sender == V && b.kind == MsgKind::Ack) {
        if (!times[n - 1].t3) times[n - 1].t3 = local;
      } else if (e.sender == P && b.kind == MsgKind::Response && b.index >= 1 && b.index <= n) {
        if (!times[b.index - 1].t2) times[b.index - 1].t2 = local;
      }
    }

    if (sp.relay && r == *sp.relay && b.to == r) {
      const auto &relay = std::get<policy::Relay>(net.sc.node(r).policy);
      auto ps = threat::relay_forward(relay, V, e, t, alpha);
      const auto from = e.seq;
      const auto &fwd = net.send(r, std::move(ps));
      net.mirror(from, fwd.seq);
      return;
    }

    if (r == V && b.to == V) {
      switch (b.kind) {
      case MsgKind::Commit:
        if (!st.commitment) {
          st.commitment = net.commits.at(e.seq);
          send_challenge(1, t + alpha);
        }
        break;
      case MsgKind::Response: {
        const auto i = b.index;
        if (i < 1 || i > n || st.got[i - 1]) break;
        st.got[i - 1] = true;
        st.responses[i - 1] = b.bits;
        st.t_recv[i - 1] = sim.local(V, t);
        if (i < n) {
          send_challenge(i + 1, t + alpha);
        } else if (sp.trailing_ack) {
          threat::PendingSend ps;
          ps.body = MessageBody{MsgKind::Ack, Phase::Rapid, V, v_partner, sid, n + 1, {}, {}, 0.0};
          ps.t_send = t + alpha;
          ps.round = n + 1;
          net.send(V, std::move(ps));
        }
        break;
      }
      case MsgKind::Decommit:
        if (!st.decommit) st.decommit = net.decommits.at(e.seq);
        break;
      default: break;
      }
      return;
    }

    if (r == P && b.to == P && b.kind == MsgKind::Challenge) {
      const auto i = b.index;
      if (i < 1 || i > n) return;
      const auto &nonce = nonces[i - 1];
      threat::PendingSend ps;
      ps.body = MessageBody{MsgKind::Response, Phase::Rapid, P, p_partner, sid, i, response_bits(b.bits, nonce), {}, 0.0};
      // A challenge handed over early is answered early by an honest prover.
      ps.t_send = t - b.lead_s + alpha;
      ps.bypass_causality = b.lead_s > 0.0;
      ps.round = i;
      ps.trigger_arrival = t;
      ps.trigger_flight = t - e.t_send;
      ps.nonce = nonce;
      st.p_challenges[i - 1] = b.bits;
      const auto &re = net.send(P, std::move(ps));
      const double t_resp = re.t_send;
      st.p_responses[i - 1] = re.payload.bits;
      if (i == n) {
        net.emit_decommit(P, opening, session_transcript(sid, st.p_challenges, st.p_responses), p_partner, sid,
                          std::max(t_resp, sim.now()));
      }
    }
  };

  net.emit_commit(P, commitment, p_partner, sid, net.sim.now());
  net.sim.run(handler);

  if (!st.decommit) {
    throw Error(ErrorCode::ProtocolStall, "one-way session " + std::to_string(sid) + " between " + node_str(V) + " and " +
                                              node_str(P) + " did not complete");
  }
  if (!crypto::opens(*st.commitment, st.decommit->opening)) {
    throw Error(ErrorCode::CommitMismatch, node_str(P) + " decommitment does not open its commitment");
  }
  const auto opened = split(st.decommit->opening.bits, cfg.bit_len);
  if (opened.size() != n) throw Error(ErrorCode::CommitMismatch, node_str(P) + " committed to the wrong number of nonces");
  for (std::uint32_t i = 0; i < n; ++i) {
    if (st.responses[i] != response_bits(st.challenges[i], opened[i])) {
      throw Error(ErrorCode::ResponseMismatch, "round " + std::to_string(i + 1) + ": response from " + node_str(P) +
                                                   " does not match challenge and nonce");
    }
  }

  auto &est = out.active;
  est.measurer = V;
  est.target = P;
  est.method = Method::Active;
  est.rounds_used = n;
  if (cfg.auth_enabled) {
    net.check_signature(P, *st.decommit, session_transcript(sid, st.challenges, st.responses));
    est.verified_auth = true;
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    est.rounds.push_back(RoundRecord{i + 1, st.challenges[i], st.responses[i], st.t_send[i], st.t_recv[i]});
    est.bound_m = std::max(est.bound_m, rtt_bound(st.t_send[i], st.t_recv[i], alpha, net.c()));
  }
  return out;
}

std::optional<estimate::PassiveObservation> make_observation(const Network &net, NodeId va, NodeId vp,
                                                             const PassiveTimes &pt) {
  if (!pt.t1 || !pt.t2 || !pt.t3) return std::nullopt;
  const auto &va_spec = net.sc.node(va);
  const auto vp_pos = net.sc.node(vp).pos;
  estimate::PassiveObservation obs;
  obs.T1 = *pt.t1;
  obs.T2 = *pt.t2;
  obs.T3 = *pt.t3;
  obs.alpha_P = net.alpha();
  obs.alpha_Va = net.alpha();
  obs.d_va_vp = threat::advertised_distance(va_spec, vp_pos);
  obs.va_pos = threat::advertised_position(va_spec);
  obs.vp_pos = vp_pos;
  obs.c = net.c();
  obs.eps_t = net.sc.tolerances.eps_t;
  obs.eps_d = net.sc.tolerances.eps_d;
  return obs;
}

/// Bound V_p derives from one overheard round, or nullopt when the timings are
/// inconsistent (incomplete, or rejected by the estimator).
std::optional<double> passive_round_bound(const std::optional<estimate::PassiveObservation> &obs) {
  if (!obs) return std::nullopt;
  try {
    return estimate::passive_bound_direct(*obs);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::NegativeBound || e.code() == ErrorCode::NegativeTimeOfFlight) return std::nullopt;
    throw;
  }
}

// ---------------------------------------------------------------------------
// Chained exchanges (mutual, one-to-many, ring)

struct ChainPlan {
  std::vector<NodeId> senders;
  std::vector<bool> fresh;  ///< the message is the sender's nonce alone
  std::vector<std::uint32_t> cycle;
};

struct ChainOutcome {
  std::uint32_t session = 0;
  ChainPlan plan;
  std::vector<RapidMessage> messages;
  std::map<NodeId, std::vector<double>> local;  ///< per node, per slot: local send or arrival time
  std::map<NodeId, crypto::Commitment> commitments;
  std::map<NodeId, crypto::Opening> openings;
  std::map<NodeId, crypto::Signature> signatures;
  crypto::Digest transcript{};
  bool auth_ok = false;
};

crypto::Digest chain_transcript(std::uint32_t sid, const std::vector<RapidMessage> &msgs) {
  crypto::Hasher h;
  h.add("gdb.chain").add(static_cast<std::uint64_t>(sid));
  for (const auto &m : msgs) h.add(static_cast<std::uint64_t>(m.sender.value)).add(m.bits);
  return h.finish();
}

using PlanBuilder = std::function<ChainPlan(const std::map<NodeId, crypto::Commitment> &)>;
/// Runs between the rapid phase and decommitment; returns per-node reports to
/// broadcast (empty for protocols without a report step).
using PostHook = std::function<std::vector<threat::NodeReport>(const ChainOutcome &)>;

ChainOutcome run_chain(Network &net, const std::vector<NodeId> &parts, const std::map<NodeId, std::size_t> &nonce_counts,
                       const PlanBuilder &build_plan, const PostHook &post_hook) {
  const auto &cfg = net.sc.config;
  const double alpha = net.alpha();
  ChainOutcome out;
  out.session = net.next_session++;
  const auto sid = out.session;

  std::map<NodeId, std::vector<BitString>> nonces;
  for (NodeId p : parts) {
    nonces[p] = net.draw_nonces(p, nonce_counts.at(p));
    auto [cm, op] = crypto::commit(concat(nonces[p]), net.nonce_rngs.at(p));
    out.openings[p] = op;
    net.emit_commit(p, cm, std::nullopt, sid, net.sim.now());
    net.policies.at(p).begin_session(cfg.n);
  }
  net.sim.run([&](Simulator &, const Emission &e, const ArrivalRecord &) {
    if (e.payload.session == sid && e.payload.kind == MsgKind::Commit) out.commitments[e.sender] = net.commits.at(e.seq);
  });

  out.plan = build_plan(out.commitments);
  const auto &plan = out.plan;
  const std::size_t total = plan.senders.size();
  for (NodeId id : net.sim.nodes()) out.local[id].assign(total, std::numeric_limits<double>::quiet_NaN());
  out.messages.resize(total);
  std::vector<bool> fired(total, false);
  std::map<NodeId, std::size_t> used;

  std::function<void(std::size_t, double, std::optional<double>, std::optional<double>)> fire =
      [&](std::size_t k, double t, std::optional<double> trig_arrival, std::optional<double> trig_flight) {
        fired[k] = true;
        const NodeId s = plan.senders[k];
        auto &pool = nonces.at(s);
        if (used[s] >= pool.size()) {
          throw Error(ErrorCode::ProtocolStall, node_str(s) + " ran out of committed nonces");
        }
        const BitString nonce = pool[used[s]++];
        const BitString bits = plan.fresh[k] ? nonce : response_bits(out.messages[k - 1].bits, nonce);
        threat::PendingSend ps;
        std::optional<NodeId> to;
        if (k + 1 < total && plan.senders[k + 1] != s) to = plan.senders[k + 1];
        ps.body = MessageBody{plan.fresh[k] ? MsgKind::Challenge : MsgKind::Response,
                              Phase::Rapid,
                              s,
                              to,
                              sid,
                              static_cast<std::uint32_t>(k + 1),
                              bits,
                              {},
                              0.0};
        ps.t_send = t;
        ps.round = plan.cycle[k] + 1;
        ps.trigger_arrival = trig_arrival;
        ps.trigger_flight = trig_flight;
        ps.nonce = nonce;
        const auto &e = net.send(s, std::move(ps));
        out.messages[k] = RapidMessage{s, e.payload.bits, e.t_send};
        out.local[s][k] = net.sim.local(s, e.t_send);
        if (k + 1 < total && plan.senders[k + 1] == s) fire(k + 1, e.t_send + alpha, e.t_send, 0.0);
      };

  if (total > 0) fire(0, net.sim.now(), std::nullopt, std::nullopt);
  net.sim.run([&](Simulator &sim, const Emission &e, const ArrivalRecord &a) {
    const auto &b = e.payload;
    if (b.session != sid || b.phase != Phase::Rapid) return;
    const std::size_t k = b.index - 1;
    out.local[a.receiver][k] = sim.local(a.receiver, a.t_arrive);
    if (k + 1 < total && !fired[k + 1] && plan.senders[k + 1] == a.receiver) {
      fire(k + 1, a.t_arrive + alpha, a.t_arrive, a.t_arrive - e.t_send);
    }
  });
  for (std::size_t k = 0; k < total; ++k) {
    if (!fired[k]) throw Error(ErrorCode::ProtocolStall, "rapid message " + std::to_string(k + 1) + " was never sent");
  }

  out.transcript = chain_transcript(sid, out.messages);
  const auto reports = post_hook ? post_hook(out) : std::vector<threat::NodeReport>{};

  std::map<NodeId, DecommitContent> received;
  for (NodeId p : parts) {
    const auto &e = net.emit_decommit(p, out.openings[p], out.transcript, std::nullopt, sid, net.sim.now());
    if (auto sig = net.decommits.at(e.seq).sig) out.signatures[p] = *sig;
  }
  for (const auto &r : reports) {
    MessageBody body{MsgKind::Report, Phase::Post, r.node, std::nullopt, sid, 0, {}, {}, 0.0};
    crypto::Hasher h;
    for (const auto &[peer, v] : r.db) h.add(static_cast<std::uint64_t>(peer.value)).add(v);
    const auto vec = h.finish();
    append(body.blob, vec);
    append(body.blob, r.transcript);
    if (cfg.auth_enabled) append(body.blob, net.registry.sign(net.keys.at(r.node), vec));
    net.sim.schedule_broadcast(r.node, std::move(body), net.sim.now());
  }
  net.sim.run([&](Simulator &, const Emission &e, const ArrivalRecord &) {
    if (e.payload.session == sid && e.payload.kind == MsgKind::Decommit) received[e.sender] = net.decommits.at(e.seq);
  });

  // Every party's commitment must open to the nonces its chain links used.
  for (NodeId p : parts) {
    auto it = received.find(p);
    if (it == received.end()) throw Error(ErrorCode::ProtocolStall, node_str(p) + " never decommitted");
    if (!crypto::opens(out.commitments.at(p), it->second.opening)) {
      throw Error(ErrorCode::CommitMismatch, node_str(p) + " decommitment does not open its commitment");
    }
    const auto opened = split(it->second.opening.bits, cfg.bit_len);
    std::size_t j = 0;
    for (std::size_t k = 0; k < total; ++k) {
      if (plan.senders[k] != p) continue;
      if (j >= opened.size()) throw Error(ErrorCode::CommitMismatch, node_str(p) + " committed to too few nonces");
      const auto expect = plan.fresh[k] ? opened[j] : response_bits(out.messages[k - 1].bits, opened[j]);
      if (expect != out.messages[k].bits) {
        throw Error(ErrorCode::ResponseMismatch, "round " + std::to_string(plan.cycle[k] + 1) + ": message " +
                                                     std::to_string(k + 1) + " from " + node_str(p) +
                                                     " does not match its committed nonce");
      }
      ++j;
    }
    if (cfg.auth_enabled) net.check_signature(p, it->second, out.transcript);
  }
  out.auth_ok = cfg.auth_enabled;
  return out;
}

std::map<NodeId, std::size_t> count_slots(const ChainPlan &plan) {
  std::map<NodeId, std::size_t> out;
  for (NodeId s : plan.senders) ++out[s];
  return out;
}

/// Round-trip estimates between consecutive senders of a chain.
std::vector<DbEstimate> pairwise_from_chain(const ChainOutcome &co, double alpha, double c) {
  std::map<std::pair<NodeId, NodeId>, DbEstimate> acc;
  const auto &plan = co.plan;
  for (std::size_t k = 1; k < plan.senders.size(); ++k) {
    const NodeId m = plan.senders[k - 1];
    const NodeId t = plan.senders[k];
    if (m == t) continue;
    auto &est = acc[{m, t}];
    est.measurer = m;
    est.target = t;
    est.method = Method::Active;
    est.verified_auth = co.auth_ok;
    const double ts = co.local.at(m)[k - 1];
    const double tr = co.local.at(m)[k];
    est.rounds.push_back(RoundRecord{plan.cycle[k] + 1, co.messages[k - 1].bits, co.messages[k].bits, ts, tr});
    est.rounds_used = static_cast<std::uint32_t>(est.rounds.size());
    est.bound_m = std::max(est.bound_m, rtt_bound(ts, tr, alpha, c));
  }
  std::vector<DbEstimate> out;
  for (auto &[_, e] : acc) out.push_back(std::move(e));
  return out;
}

ChainPlan mutual_plan(NodeId first, NodeId second, std::uint32_t n) {
  ChainPlan p;
  for (std::uint32_t k = 0; k < 2 * n + 1; ++k) {
    p.senders.push_back(k % 2 == 0 ? first : second);
    p.fresh.push_back(k == 0);
    p.cycle.push_back(k == 0 ? 0 : (k - 1) / 2);
  }
  return p;
}

ChainPlan one_to_many_plan(NodeId initiator, const std::vector<NodeId> &others, std::uint32_t n) {
  ChainPlan p;
  for (std::uint32_t r = 0; r < n; ++r) {
    p.senders.push_back(initiator);
    p.fresh.push_back(true);
    p.cycle.push_back(r);
    for (NodeId o : others) {
      p.senders.push_back(o);
      p.fresh.push_back(false);
      p.cycle.push_back(r);
      p.senders.push_back(initiator);
      p.fresh.push_back(false);
      p.cycle.push_back(r);
    }
  }
  return p;
}

/// Clockwise pass then counter-clockwise pass back to the start, per cycle.
ChainPlan ring_plan(const RingOrder &ring, std::uint32_t n) {
  ChainPlan p;
  const std::size_t N = ring.size();
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < N; ++i) {
      p.senders.push_back(ring[i]);
      p.fresh.push_back(i == 0);
      p.cycle.push_back(r);
    }
    p.senders.push_back(ring[0]);
    p.fresh.push_back(false);
    p.cycle.push_back(r);
    for (std::size_t i = N - 1; i >= 1; --i) {
      p.senders.push_back(ring[i]);
      p.fresh.push_back(false);
      p.cycle.push_back(r);
    }
  }
  return p;
}

std::vector<DbEstimate> run_one_to_many_on(Network &net, NodeId initiator, const std::vector<NodeId> &others) {
  const auto n = net.sc.config.n;
  auto plan = one_to_many_plan(initiator, others, n);
  std::vector<NodeId> parts{initiator};
  parts.insert(parts.end(), others.begin(), others.end());
  auto co = run_chain(net, parts, count_slots(plan), [&](const auto &) { return plan; }, nullptr);
  return pairwise_from_chain(co, net.alpha(), net.c());
}

std::vector<DbEstimate> run_mutual_on(Network &net, NodeId a, NodeId b) {
  auto plan = mutual_plan(std::min(a, b), std::max(a, b), net.sc.config.n);
  auto co = run_chain(net, {a, b}, count_slots(plan), [&](const auto &) { return plan; }, nullptr);
  return pairwise_from_chain(co, net.alpha(), net.c());
}

struct RingRun {
  ChainOutcome chain;
  std::vector<DbEstimate> estimates;
  std::vector<threat::NodeReport> reports;
  std::map<NodeId, std::vector<estimate::TofSolution>> solutions;
};

RingRun run_ring_on(Network &net, const std::vector<NodeId> &peers, const RingOptions &opt) {
  const auto n = net.sc.config.n;
  const double alpha = net.alpha();
  const double c = net.c();
  RingRun rr;
  RingOrder ring;
  std::map<NodeId, std::size_t> counts;
  for (NodeId p : peers) counts[p] = 2 * static_cast<std::size_t>(n);

  auto build = [&](const std::map<NodeId, crypto::Commitment> &cms) {
    ring = opt.forced_order ? *opt.forced_order : ring_order(peers, cms);
    return ring_plan(ring, n);
  };
  auto post = [&](const ChainOutcome &co) {
    const std::size_t N = ring.size();
    const std::size_t per_cycle = 2 * N;
    for (NodeId o : peers) {
      threat::NodeReport rep;
      rep.node = o;
      rep.transcript = co.transcript;
      std::map<NodeId, DbEstimate> row;
      for (std::uint32_t cy = 0; cy < n; ++cy) {
        estimate::CycleView view;
        view.observer = o;
        view.alpha = alpha;
        for (std::size_t k = cy * per_cycle; k < (cy + 1) * per_cycle; ++k) {
          view.senders.push_back(co.plan.senders[k]);
          const double t = co.local.at(o)[k];
          view.local_times.push_back(std::isnan(t) ? std::nullopt : std::optional<double>(t));
        }
        const auto sys = estimate::build_tof_system(view, ring);
        auto sol = estimate::solve_tof(sys);
        for (NodeId x : peers) {
          if (x == o) continue;
          auto &est = row[x];
          est.measurer = o;
          est.target = x;
          est.method = Method::MultiParty;
          est.rounds_used = cy + 1;
          est.verified_auth = net.sc.config.auth_enabled;
          est.bound_m = std::max(est.bound_m, std::max(0.0, c * sol.tof.at(NodePair::of(o, x))));
        }
        rep.residual = std::max(rep.residual, sol.residual);
        rr.solutions[o].push_back(std::move(sol));
      }
      for (auto &[x, est] : row) {
        rep.db[x] = est.bound_m;
        rr.estimates.push_back(std::move(est));
      }
      rr.reports.push_back(std::move(rep));
    }
    return rr.reports;
  };
  rr.chain = run_chain(net, peers, counts, build, post);
  return rr;
}

struct MpnvSpec {
  std::vector<NodeId> verifiers;
  std::vector<NodeId> provers;
  std::uint32_t n_a = 1;
  double d_a = 1.0;
  std::uint64_t selection_tag = 0;
};

std::vector<NodeId> select_active(const Network &net, const MpnvSpec &m) {
  const auto k = active_count(m.d_a, m.verifiers.size());
  auto pool = m.verifiers;
  std::sort(pool.begin(), pool.end());
  auto rng = Rng::derive(net.sc.rng_seed, 0x5E1E, m.selection_tag);
  rng.shuffle(pool);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void run_mpnv_on(Network &net, const MpnvSpec &m, RunResult &out) {
  const auto n = net.sc.config.n;
  if (m.n_a == 0) throw Error(ErrorCode::NoActiveVerifier, "n_a = 0 leaves no active rounds");
  if (m.verifiers.empty()) throw Error(ErrorCode::NoActiveVerifier, "no verifiers");
  const auto active = select_active(net, m);

  // passive bounds per (verifier, prover) in chronological order
  std::map<std::pair<NodeId, NodeId>, std::vector<double>> passive;
  std::map<std::pair<NodeId, NodeId>, DbEstimate> active_est;
  for (NodeId p : m.provers) {
    for (NodeId v : active) {
      SessionSpec sp;
      sp.verifier = v;
      sp.prover = p;
      sp.rounds = m.n_a;
      sp.trailing_ack = true;
      for (NodeId o : m.verifiers) {
        if (o != v) sp.observers.push_back(o);
      }
      auto so = run_session(net, sp);
      active_est[{v, p}] = std::move(so.active);
      for (auto &[o, rounds] : so.passive) {
        for (const auto &pt : rounds) {
          if (auto b = passive_round_bound(make_observation(net, v, o, pt))) {
            passive[{o, p}].push_back(*b);
          } else {
            ++out.rejected_passive_rounds;
          }
        }
      }
    }
  }

  for (NodeId v : m.verifiers) {
    for (NodeId p : m.provers) {
      DbEstimate est;
      est.measurer = v;
      est.target = p;
      est.method = Method::Passive;
      std::uint32_t own = 0;
      if (auto it = active_est.find({v, p}); it != active_est.end()) {
        est = it->second;
        own = est.rounds_used;
      }
      est.verified_auth = net.sc.config.auth_enabled;
      const auto cap = n > own ? n - own : 0;
      const auto &pool = passive[{v, p}];
      const auto take = std::min<std::size_t>(cap, pool.size());
      for (std::size_t i = 0; i < take; ++i) est.bound_m = std::max(est.bound_m, pool[i]);
      est.rounds_used = own + static_cast<std::uint32_t>(take);
      out.estimates.push_back(std::move(est));
    }
  }
}

void finish(Network &net, RunResult &out) {
  out.trace = net.sim.take_trace();
  out.rapid_count = out.trace.count(Phase::Rapid);
  out.pre_post_count = out.trace.count(Phase::Pre) + out.trace.count(Phase::Post);
}

std::vector<NodeId> ids(const Scenario &s) {
  std::vector<NodeId> out;
  for (const auto &n : s.nodes) out.push_back(n.id);
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

RunResult run_one_way_db(const Scenario &s) {
  require_valid(s);
  Network net(s);
  RunResult out;
  out.protocol = ProtocolKind::OneWayDB;
  SessionSpec sp;
  sp.verifier = s.ids_with_role(Role::ActiveVerifier).front();
  for (NodeId p : s.ids_with_role(Role::Prover)) {
    if (std::holds_alternative<policy::Relay>(s.node(p).policy)) {
      sp.relay = p;
    } else {
      sp.prover = p;
    }
  }
  sp.rounds = s.config.n;
  sp.observers = s.ids_with_role(Role::PassiveVerifier);
  sp.trailing_ack = !sp.observers.empty();
  auto so = run_session(net, sp);
  out.estimates.push_back(so.active);
  for (auto &[o, rounds] : so.passive) {
    DbEstimate est;
    est.measurer = o;
    est.target = sp.prover;
    est.method = Method::Passive;
    est.verified_auth = so.active.verified_auth;
    for (std::uint32_t i = 0; i < rounds.size(); ++i) {
      const auto obs = make_observation(net, sp.verifier, o, rounds[i]);
      if (obs) out.passive_observations.push_back(PassiveRecord{o, sp.verifier, sp.prover, i + 1, *obs});
      if (auto b = passive_round_bound(obs)) {
        est.bound_m = std::max(est.bound_m, *b);
        ++est.rounds_used;
      } else {
        ++out.rejected_passive_rounds;
      }
    }
    out.estimates.push_back(std::move(est));
  }
  finish(net, out);
  return out;
}

RunResult run_mutual_db_interleaved(const Scenario &s) {
  require_valid(s);
  Network net(s);
  RunResult out;
  out.protocol = ProtocolKind::MutualInterleaved;
  const auto all = ids(s);
  out.estimates = run_mutual_on(net, all[0], all[1]);
  finish(net, out);
  return out;
}

RunResult run_one_to_many(const Scenario &s) {
  require_valid(s);
  Network net(s);
  RunResult out;
  out.protocol = ProtocolKind::OneToMany;
  const auto all = ids(s);
  out.estimates = run_one_to_many_on(net, all.front(), std::vector<NodeId>(all.begin() + 1, all.end()));
  finish(net, out);
  return out;
}

RunResult run_multiparty_gdb(const Scenario &s, const RingOptions &opt) {
  require_valid(s);
  if (opt.forced_order) {
    auto forced = *opt.forced_order;
    std::sort(forced.begin(), forced.end());
    if (forced != ids(s)) throw Error(ErrorCode::ParamOutOfRange, "forced ring order must list every node once");
  }
  Network net(s);
  RunResult out;
  out.protocol = ProtocolKind::MultiPartyRing;
  auto rr = run_ring_on(net, ids(s), opt);
  out.estimates = std::move(rr.estimates);
  out.detection = threat::cross_check_detect(rr.reports, s.tolerances.eps_detect);
  MultiPartyTranscript tr;
  tr.ring = std::vector<NodeId>();
  for (std::size_t k = 0; k < s.nodes.size(); ++k) tr.ring.push_back(rr.chain.plan.senders[k]);
  tr.commitments = rr.chain.commitments;
  tr.openings = rr.chain.openings;
  tr.rapid = rr.chain.messages;
  tr.reports = std::move(rr.reports);
  tr.signatures = rr.chain.signatures;
  tr.solutions = std::move(rr.solutions);
  out.transcript = std::move(tr);
  finish(net, out);
  return out;
}

RunResult run_mpnv(const Scenario &s) {
  require_valid(s);
  Network net(s);
  RunResult out;
  out.protocol = ProtocolKind::MPNV;
  MpnvSpec m;
  m.verifiers = s.ids_with_role(Role::ActiveVerifier);
  for (NodeId v : s.ids_with_role(Role::PassiveVerifier)) m.verifiers.push_back(v);
  std::sort(m.verifiers.begin(), m.verifiers.end());
  m.provers = s.ids_with_role(Role::Prover);
  m.n_a = s.experiment.n_a.value_or(s.config.n);
  m.d_a = s.experiment.d_a.value_or(1.0);
  run_mpnv_on(net, m, out);
  finish(net, out);
  return out;
}

RunResult run_mpnv_baseline(const Scenario &s) {
  require_valid(s);
  Network net(s);
  RunResult out;
  out.protocol = ProtocolKind::MPNV;
  auto verifiers = s.ids_with_role(Role::ActiveVerifier);
  for (NodeId v : s.ids_with_role(Role::PassiveVerifier)) verifiers.push_back(v);
  std::sort(verifiers.begin(), verifiers.end());
  for (NodeId p : s.ids_with_role(Role::Prover)) {
    for (NodeId v : verifiers) {
      SessionSpec sp;
      sp.verifier = v;
      sp.prover = p;
      sp.rounds = s.config.n;
      out.estimates.push_back(run_session(net, sp).active);
    }
  }
  finish(net, out);
  return out;
}

RunResult run_ntom(const Scenario &s, NtoMVariant variant) {
  require_valid(s);
  Network net(s);
  RunResult out;
  const auto g1 = s.group(1);
  const auto g2 = s.group(2);
  switch (variant) {
  case NtoMVariant::Passive: {
    out.protocol = ProtocolKind::NtoMPassive;
    MpnvSpec a{g1, g2, s.experiment.n_a1.value_or(s.config.n), s.experiment.d_1.value_or(1.0), 1};
    MpnvSpec b{g2, g1, s.experiment.n_a2.value_or(s.config.n), s.experiment.d_2.value_or(1.0), 2};
    run_mpnv_on(net, a, out);
    run_mpnv_on(net, b, out);
    break;
  }
  case NtoMVariant::MultiParty: {
    out.protocol = ProtocolKind::NtoMMultiParty;
    auto rr = run_ring_on(net, ids(s), {});
    const std::set<NodeId> first(g1.begin(), g1.end());
    for (auto &e : rr.estimates) e.surplus = first.count(e.measurer) == first.count(e.target);
    out.estimates = std::move(rr.estimates);
    out.detection = threat::cross_check_detect(rr.reports, s.tolerances.eps_detect);
    break;
  }
  case NtoMVariant::OneToMany:
    out.protocol = ProtocolKind::NtoMOneToMany;
    for (NodeId i : g1) {
      for (auto &e : run_one_to_many_on(net, i, g2)) out.estimates.push_back(std::move(e));
    }
    break;
  }
  finish(net, out);
  return out;
}

RunResult run_pairwise_one_way(const Scenario &s) {
  Network net(s);
  RunResult out;
  out.protocol = s.protocol;
  const auto all = ids(s);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      for (auto [v, p] : {std::pair{all[i], all[j]}, std::pair{all[j], all[i]}}) {
        SessionSpec sp;
        sp.verifier = v;
        sp.prover = p;
        sp.rounds = s.config.n;
        out.estimates.push_back(run_session(net, sp).active);
      }
    }
  }
  finish(net, out);
  return out;
}

RunResult run_pairwise_interleaved(const Scenario &s) {
  Network net(s);
  RunResult out;
  out.protocol = s.protocol;
  const auto all = ids(s);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      for (auto &e : run_mutual_on(net, all[i], all[j])) out.estimates.push_back(std::move(e));
    }
  }
  finish(net, out);
  return out;
}

RunResult run_scenario(const Scenario &s) {
  switch (s.protocol) {
  case ProtocolKind::OneWayDB: return run_one_way_db(s);
  case ProtocolKind::MutualInterleaved: return run_mutual_db_interleaved(s);
  case ProtocolKind::OneToMany: return run_one_to_many(s);
  case ProtocolKind::MultiPartyRing: return run_multiparty_gdb(s);
  case ProtocolKind::MPNV: return run_mpnv(s);
  case ProtocolKind::NtoMPassive: return run_ntom(s, NtoMVariant::Passive);
  case ProtocolKind::NtoMMultiParty: return run_ntom(s, NtoMVariant::MultiParty);
  case ProtocolKind::NtoMOneToMany: return run_ntom(s, NtoMVariant::OneToMany);
  }
  throw Error(ErrorCode::ParamOutOfRange, "unknown protocol");
}

void write_bounds_csv(const std::vector<DbEstimate> &estimates, std::ostream &out) {
  auto sorted = estimates;
  std::sort(sorted.begin(), sorted.end(), [](const DbEstimate &a, const DbEstimate &b) {
    return std::pair(a.measurer, a.target) < std::pair(b.measurer, b.target);
  });
  out << "measurer,target,bound_m,method,auth_ok,surplus\n";
  char buf[64];
  for (const auto &e : sorted) {
    std::snprintf(buf, sizeof buf, "%.9f", e.bound_m);
    out << e.measurer.value << ',' << e.target.value << ',' << buf << ',' << to_string(e.method) << ','
        << (e.verified_auth ? "true" : "false") << ',' << (e.surplus ? "true" : "false") << '\n';
  }
}

} // namespace gdb::proto
