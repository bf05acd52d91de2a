#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "gdb/core.hpp"
#include "gdb/crypto.hpp"
#include "gdb/estimate.hpp"
#include "gdb/simkit.hpp"
#include "gdb/threat.hpp"

namespace gdb::proto {

enum class Method { Active, Passive, MultiParty };
std::string_view to_string(Method m);

struct RoundRecord {
  std::uint32_t index = 0;
  BitString challenge;
  BitString response;
  double t_send = 0.0;  ///< challenger's local clock
  double t_recv = 0.0;  ///< challenger's local clock
};

struct DbEstimate {
  NodeId measurer;
  NodeId target;
  double bound_m = 0.0;
  Method method = Method::Active;
  std::uint32_t rounds_used = 0;
  bool verified_auth = false;
  bool surplus = false;  ///< produced but not asked for (same-group pairs)
  std::vector<RoundRecord> rounds;
};

using RingOrder = std::vector<NodeId>;

/// Ascending by hash(commitment digest), ties by NodeId. Throws
/// MissingCommitment when `commitments` lacks one of `nodes`.
RingOrder ring_order(const std::vector<NodeId> &nodes, const std::map<NodeId, crypto::Commitment> &commitments);

struct RapidMessage {
  NodeId sender;
  BitString bits;
  double t_send = 0.0;  ///< true time
};

struct MultiPartyTranscript {
  RingOrder ring;
  std::map<NodeId, crypto::Commitment> commitments;
  std::map<NodeId, crypto::Opening> openings;
  std::vector<RapidMessage> rapid;
  std::vector<threat::NodeReport> reports;
  std::map<NodeId, crypto::Signature> signatures;
  /// Per observer, per cycle solution of its time-of-flight system.
  std::map<NodeId, std::vector<estimate::TofSolution>> solutions;
};

/// What one passive verifier overheard in one round of a one-way run.
struct PassiveRecord {
  NodeId observer;
  NodeId active;
  NodeId prover;
  std::uint32_t round = 0;
  estimate::PassiveObservation obs;
};

struct RunResult {
  ProtocolKind protocol = ProtocolKind::OneWayDB;
  std::vector<DbEstimate> estimates;
  simkit::Trace trace;
  std::size_t rapid_count = 0;
  std::size_t pre_post_count = 0;
  std::optional<MultiPartyTranscript> transcript;
  std::optional<threat::DetectionReport> detection;
  std::size_t rejected_passive_rounds = 0;  ///< passive rounds whose timings were inconsistent
  std::vector<PassiveRecord> passive_observations;  ///< one-way runs only

  const DbEstimate *find(NodeId measurer, NodeId target) const;
};

struct RingOptions {
  /// Replaces the commitment-derived ring order (tests pin the order).
  std::optional<RingOrder> forced_order;
};

/// Dispatches on scenario.protocol after validation.
RunResult run_scenario(const Scenario &s);

/// One verifier, one prover (optionally through a relay), plus any passive
/// verifiers overhearing the exchange.
RunResult run_one_way_db(const Scenario &s);
RunResult run_mutual_db_interleaved(const Scenario &s);
RunResult run_one_to_many(const Scenario &s);
RunResult run_multiparty_gdb(const Scenario &s, const RingOptions &opt = {});
RunResult run_mpnv(const Scenario &s);
/// Every verifier runs n active rounds with every prover, nothing passive.
RunResult run_mpnv_baseline(const Scenario &s);

enum class NtoMVariant { Passive, MultiParty, OneToMany };
RunResult run_ntom(const Scenario &s, NtoMVariant variant);

/// Pairwise baselines over the Peer nodes of `s`: two one-way exchanges per
/// pair, or one interleaved mutual exchange per pair.
RunResult run_pairwise_one_way(const Scenario &s);
RunResult run_pairwise_interleaved(const Scenario &s);

/// Columns measurer, target, bound_m, method, auth_ok, surplus.
void write_bounds_csv(const std::vector<DbEstimate> &estimates, std::ostream &out);

} // namespace gdb::proto
