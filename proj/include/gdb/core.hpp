#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gdb/core_types.hpp"
#include "gdb/errors.hpp"
#include "gdb/policy.hpp"

namespace gdb {

enum class Role { Prover, ActiveVerifier, PassiveVerifier, Peer };

std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

inline bool is_verifier(Role r) { return r == Role::ActiveVerifier || r == Role::PassiveVerifier; }

enum class ProtocolKind {
  OneWayDB,
  MutualInterleaved,
  OneToMany,
  MultiPartyRing,
  MPNV,
  NtoMPassive,
  NtoMMultiParty,
  NtoMOneToMany,
};

std::string_view to_string(ProtocolKind p);
std::optional<ProtocolKind> parse_protocol(std::string_view s);

struct ProtocolConfig {
  std::uint32_t n = 1;        ///< rounds per DB exchange
  std::uint32_t bit_len = 1;  ///< bits per nonce string
  double alpha = 0.0;         ///< per-node processing time, s
  double c = kSpeedOfLight;   ///< propagation speed, m/s
  std::uint32_t pre_post_msgs = 2;
  bool auth_enabled = false;
};

struct ExperimentParams {
  std::optional<std::uint32_t> n_a;
  std::optional<std::uint32_t> n_p;
  std::optional<double> d_a;
  std::optional<double> d_1;
  std::optional<double> d_2;
  std::optional<std::uint32_t> n_a1;
  std::optional<std::uint32_t> n_a2;
  std::optional<std::uint32_t> n_p1;
  std::optional<std::uint32_t> n_p2;
  std::optional<std::uint32_t> N;
  std::optional<std::uint32_t> M;
};

struct Tolerances {
  double eps_t = kEpsTime;
  double eps_d = kEpsDist;
  double eps_detect = kEpsDetect;
};

struct NodeSpec {
  NodeId id;
  Position pos;
  Role role = Role::Peer;
  AdversaryPolicy policy = policy::Honest{};
  bool has_cert = true;
  std::optional<int> group;  ///< 1 or 2, NtoM scenarios only
};

struct Scenario {
  std::vector<NodeSpec> nodes;
  ProtocolKind protocol = ProtocolKind::OneWayDB;
  ProtocolConfig config;
  ExperimentParams experiment;
  std::uint64_t rng_seed = 0;
  Tolerances tolerances;

  const NodeSpec &node(NodeId id) const;
  std::vector<NodeId> ids_with_role(Role r) const;
  std::vector<NodeId> group(int g) const;
};

struct Violation {
  ErrorCode code;
  std::string field;
  std::string message;
};

/// All invariant violations of `s`; empty means valid.
std::vector<Violation> validate_scenario(const Scenario &s);

/// Throws the first violation as an Error.
void require_valid(const Scenario &s);

/// Number of active verifiers for a fraction: nearest integer, at least 1.
std::uint32_t active_count(double fraction, std::size_t verifiers);

} // namespace gdb
