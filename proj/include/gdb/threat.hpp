#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "gdb/core.hpp"
#include "gdb/crypto.hpp"
#include "gdb/rng.hpp"
#include "gdb/simkit.hpp"

namespace gdb::threat {

/// Per-node, per-run policy state. Each node gets its own random stream so an
/// inert policy never perturbs anyone else's draws.
struct PolicyState {
  NodeId node;
  Role role = Role::Peer;
  AdversaryPolicy policy;
  Rng rng{0};
  std::set<std::uint32_t> early_rounds;  ///< EarlyChallenge rounds of the current session
  double pending_mask = 0.0;             ///< lead still to be hidden in the next emission

  PolicyState() = default;
  PolicyState(const NodeSpec &spec, std::uint64_t seed);

  /// Resets per-session bookkeeping; `rounds` is the session's round count.
  void begin_session(std::uint32_t rounds);
};

/// An emission the node is about to make, with the context a policy needs.
struct PendingSend {
  simkit::MessageBody body;
  double t_send = 0.0;                  ///< honest send time
  std::uint32_t rapid_ordinal = 0;      ///< 1-based rapid message number in the run; 0 otherwise
  std::uint32_t round = 0;              ///< 1-based round within the session; 0 if none
  std::optional<double> trigger_arrival;  ///< arrival of the message this one answers
  std::optional<double> trigger_flight;   ///< flight time of that message
  std::optional<BitString> nonce;         ///< own nonce folded into this message
  bool bypass_causality = false;        ///< set when the send precedes its trigger
};

/// Rewrites `send` according to the node's policy. Throws PolicyInapplicable
/// when the policy cannot act on this kind of emission.
PendingSend apply_policy(PolicyState &state, PendingSend send);

/// Relay behaviour: the copy the relaying node emits after receiving `incoming`,
/// readdressed to the other side.
PendingSend relay_forward(const policy::Relay &relay, NodeId verifier, const simkit::Emission &incoming,
                          double arrival, double alpha);

/// Position V_a advertises to passive verifiers.
Position advertised_position(const NodeSpec &va);

/// Distance from V_a to `vp` as advertised by V_a.
double advertised_distance(const NodeSpec &va, Position vp);

struct NodeReport {
  NodeId node;
  std::map<NodeId, double> db;  ///< bound to each peer, meters
  crypto::Digest transcript{};
  double residual = 0.0;  ///< worst residual of the node's own timing systems, s
};

struct Evidence {
  NodePair pair;
  double bound_a = 0.0;  ///< reported by pair.a
  double bound_b = 0.0;  ///< reported by pair.b
  double discrepancy = 0.0;
};

struct DetectionReport {
  std::set<NodeId> accused;
  std::vector<Evidence> evidence;
  std::map<NodeId, std::string> verdict;
  /// Reporters whose own timing system does not close; the reporter is not
  /// accused, it only knows that someone's timing is off.
  std::map<NodeId, double> alarms;

  bool empty() const { return accused.empty() && evidence.empty() && alarms.empty(); }
};

/// Flags pairs whose two endpoints disagree by more than `eps_detect`, nodes
/// whose transcript digest differs from the majority, and reporters whose
/// residual exceeds `residual_tol`.
DetectionReport cross_check_detect(const std::vector<NodeReport> &reports, double eps_detect,
                                   double residual_tol = 1e-10);

void write_detection_json(const DetectionReport &r, std::ostream &out);

} // namespace gdb::threat
