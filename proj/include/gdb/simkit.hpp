#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <vector>

#include "gdb/bits.hpp"
#include "gdb/core_types.hpp"
#include "gdb/crypto.hpp"

namespace gdb::simkit {

enum class Phase : std::uint8_t { Pre, Rapid, Post };
enum class MsgKind : std::uint8_t { Cert, Commit, Challenge, Response, Ack, Decommit, Report };

std::string_view to_string(Phase p);
std::string_view to_string(MsgKind k);

struct MessageBody {
  MsgKind kind = MsgKind::Challenge;
  Phase phase = Phase::Rapid;
  NodeId origin;             ///< claimed originator; relays keep it
  std::optional<NodeId> to;  ///< logical addressee; the channel still broadcasts
  std::uint32_t session = 0;
  std::uint32_t index = 0;   ///< position within the session
  BitString bits;
  std::vector<std::uint8_t> blob;
  /// The challenge was made available to its addressee this long before the
  /// emission (early-challenge attack); zero for every honest message.
  double lead_s = 0.0;
};

crypto::Digest digest(const MessageBody &body);

struct Emission {
  std::uint64_t seq = 0;
  NodeId sender;
  MessageBody payload;
  double t_send = 0.0;  ///< true time
};

struct ArrivalRecord {
  std::uint64_t seq = 0;
  NodeId receiver;
  double t_arrive = 0.0;  ///< true time
};

struct Trace {
  std::deque<Emission> emissions;          ///< indexed by seq
  std::vector<ArrivalRecord> arrivals;     ///< sorted by (t_arrive, seq, receiver)
  std::map<NodeId, double> clock_offsets;

  std::size_t count(Phase p) const;
  std::size_t count_all() const { return emissions.size(); }
  const Emission &emission(std::uint64_t seq) const { return emissions.at(seq); }
};

/// Per-node clock: local reading = true time + offset.
struct LocalClock {
  NodeId owner;
  double offset = 0.0;

  double read(double true_time) const { return true_time + offset; }
  double to_true(double local_time) const { return local_time - offset; }
};

/// Single broadcast domain: every emission reaches every other node after
/// distance / c. Arrivals are processed in (t_arrive, seq, receiver) order.
class Simulator {
public:
  using Handler = std::function<void(Simulator &, const Emission &, const ArrivalRecord &)>;

  /// Clock offsets are drawn uniformly from [0, 1) s with `seed`.
  Simulator(const std::vector<std::pair<NodeId, Position>> &nodes, double c, std::uint64_t seed);

  /// Broadcast from `sender` at true time `t_send`. Throws CausalityViolation
  /// when `t_send` precedes the event currently being handled.
  const Emission &schedule_broadcast(NodeId sender, MessageBody payload, double t_send);

  /// Same, without the causality check. Only adversarial behaviour (early
  /// responses, early challenges) goes through here.
  const Emission &schedule_broadcast_unchecked(NodeId sender, MessageBody payload, double t_send);

  /// Drains the event queue, invoking `handler` for every arrival.
  void run(const Handler &handler);

  /// Time of the arrival currently (or most recently) handled.
  double now() const { return now_; }

  double c() const { return c_; }
  double tof(NodeId a, NodeId b) const;
  Position position(NodeId id) const;
  const std::vector<NodeId> &nodes() const { return ids_; }
  const LocalClock &clock(NodeId id) const;
  double local(NodeId id, double true_time) const { return clock(id).read(true_time); }

  const Trace &trace() const { return trace_; }
  /// Finalises arrival ordering and hands the trace over.
  Trace take_trace();

private:
  struct Pending {
    double t;
    std::uint64_t seq;
    NodeId receiver;
    bool operator>(const Pending &o) const {
      if (t != o.t) return t > o.t;
      if (seq != o.seq) return seq > o.seq;
      return receiver > o.receiver;
    }
  };

  const Emission &emit(NodeId sender, MessageBody payload, double t_send);

  double c_;
  std::vector<NodeId> ids_;
  std::map<NodeId, Position> pos_;
  std::map<NodeId, LocalClock> clocks_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
  Trace trace_;
  double now_ = 0.0;
};

/// Line-delimited JSON, one record per emission then one per arrival, fields
/// kind, seq, sender, receiver, t_send, t_arrive, payload_digest.
void write_trace_jsonl(const Trace &trace, std::ostream &out);

} // namespace gdb::simkit
