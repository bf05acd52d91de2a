#include "gdb/simkit.hpp"

#include <algorithm>
#include <string>

#include "json.hpp"

#include "gdb/errors.hpp"
#include "gdb/rng.hpp"

namespace gdb::simkit {

std::string_view to_string(Phase p) {
  switch (p) {
  case Phase::Pre: return "pre";
  case Phase::Rapid: return "rapid";
  case Phase::Post: return "post";
  }
  return "?";
}

std::string_view to_string(MsgKind k) {
  switch (k) {
  case MsgKind::Cert: return "cert";
  case MsgKind::Commit: return "commit";
  case MsgKind::Challenge: return "challenge";
  case MsgKind::Response: return "response";
  case MsgKind::Ack: return "ack";
  case MsgKind::Decommit: return "decommit";
  case MsgKind::Report: return "report";
  }
  return "?";
}

crypto::Digest digest(const MessageBody &body) {
  crypto::Hasher h;
  h.add(static_cast<std::uint64_t>(body.kind))
      .add(static_cast<std::uint64_t>(body.phase))
      .add(static_cast<std::uint64_t>(body.origin.value))
      .add(static_cast<std::uint64_t>(body.to ? body.to->value + 1ULL : 0ULL))
      .add(static_cast<std::uint64_t>(body.session))
      .add(static_cast<std::uint64_t>(body.index))
      .add(body.bits)
      .add(std::span(body.blob));
  // Honest messages hash identically whether or not the attack field exists.
  if (body.lead_s != 0.0) h.add(body.lead_s);
  return h.finish();
}

std::size_t Trace::count(Phase p) const {
  return static_cast<std::size_t>(
      std::count_if(emissions.begin(), emissions.end(), [p](const Emission &e) { return e.payload.phase == p; }));
}

Simulator::Simulator(const std::vector<std::pair<NodeId, Position>> &nodes, double c, std::uint64_t seed) : c_(c) {
  auto rng = Rng::derive(seed, 0xC10C);
  std::vector<std::pair<NodeId, Position>> sorted = nodes;
  std::sort(sorted.begin(), sorted.end(), [](auto &a, auto &b) { return a.first < b.first; });
  for (const auto &[id, p] : sorted) {
    ids_.push_back(id);
    pos_[id] = p;
    LocalClock clk{id, rng.uniform01()};
    clocks_[id] = clk;
    trace_.clock_offsets[id] = clk.offset;
  }
}

double Simulator::tof(NodeId a, NodeId b) const { return distance(position(a), position(b)) / c_; }

Position Simulator::position(NodeId id) const {
  auto it = pos_.find(id);
  if (it == pos_.end()) throw Error(ErrorCode::MissingField, "unknown node " + std::to_string(id.value));
  return it->second;
}

const LocalClock &Simulator::clock(NodeId id) const {
  auto it = clocks_.find(id);
  if (it == clocks_.end()) throw Error(ErrorCode::MissingField, "unknown node " + std::to_string(id.value));
  return it->second;
}

const Emission &Simulator::schedule_broadcast(NodeId sender, MessageBody payload, double t_send) {
  if (t_send < now_) {
    throw Error(ErrorCode::CausalityViolation, "node " + std::to_string(sender.value) + " sends at " +
                                                   std::to_string(t_send) + " before triggering event at " +
                                                   std::to_string(now_));
  }
  return emit(sender, std::move(payload), t_send);
}

const Emission &Simulator::schedule_broadcast_unchecked(NodeId sender, MessageBody payload, double t_send) {
  return emit(sender, std::move(payload), t_send);
}

const Emission &Simulator::emit(NodeId sender, MessageBody payload, double t_send) {
  const Position from = position(sender);
  const std::uint64_t seq = trace_.emissions.size();
  trace_.emissions.push_back(Emission{seq, sender, std::move(payload), t_send});
  for (NodeId r : ids_) {
    if (r == sender) continue;
    queue_.push(Pending{t_send + distance(from, pos_.at(r)) / c_, seq, r});
  }
  return trace_.emissions.back();
}

void Simulator::run(const Handler &handler) {
  while (!queue_.empty()) {
    Pending ev = queue_.top();
    queue_.pop();
    now_ = ev.t;
    trace_.arrivals.push_back(ArrivalRecord{ev.seq, ev.receiver, ev.t});
    // Copy: the handler may append emissions.
    const ArrivalRecord rec = trace_.arrivals.back();
    handler(*this, trace_.emissions[ev.seq], rec);
  }
}

Trace Simulator::take_trace() {
  std::stable_sort(trace_.arrivals.begin(), trace_.arrivals.end(), [](const ArrivalRecord &a, const ArrivalRecord &b) {
    if (a.t_arrive != b.t_arrive) return a.t_arrive < b.t_arrive;
    if (a.seq != b.seq) return a.seq < b.seq;
    return a.receiver < b.receiver;
  });
  return std::move(trace_);
}

void write_trace_jsonl(const Trace &trace, std::ostream &out) {
  using nlohmann::json;
  for (const auto &e : trace.emissions) {
    json j = {{"kind", "emission"},
              {"seq", e.seq},
              {"sender", e.sender.value},
              {"receiver", nullptr},
              {"t_send", e.t_send},
              {"t_arrive", nullptr},
              {"msg", to_string(e.payload.kind)},
              {"phase", to_string(e.payload.phase)},
              {"payload_digest", crypto::to_hex(digest(e.payload))}};
    out << j.dump() << '\n';
  }
  for (const auto &a : trace.arrivals) {
    const auto &e = trace.emission(a.seq);
    json j = {{"kind", "arrival"},
              {"seq", a.seq},
              {"sender", e.sender.value},
              {"receiver", a.receiver.value},
              {"t_send", e.t_send},
              {"t_arrive", a.t_arrive},
              {"payload_digest", crypto::to_hex(digest(e.payload))}};
    out << j.dump() << '\n';
  }
}

} // namespace gdb::simkit
