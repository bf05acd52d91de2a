#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gdb/core_types.hpp"

namespace gdb {

/// Adversary behaviours a node can be configured with. Parameters are in
/// seconds and meters.
namespace policy {

struct Honest {};

/// Distance fraud: answer before the challenge arrives using a random guess.
struct GuessAhead {
  /// Number of rounds answered early; nullopt means every round.
  std::optional<std::uint32_t> rounds;
  /// How much earlier than the challenge arrival the response leaves. nullopt
  /// means "as early as the challenge was emitted" (one full flight time).
  std::optional<double> advance_s;
};

/// Adds processing delay to the node's own rapid-phase emissions.
struct SelectiveDelay {
  double all_s = 0.0;
  /// (1-based rapid-phase message number within the run, delay)
  std::vector<std::pair<std::uint32_t, double>> per_message;
  /// (addressee, delay) for protocols with addressed responses.
  std::vector<std::pair<NodeId, double>> per_target;
};

/// Mafia fraud: pose as `victim` to the verifier and as the verifier to the
/// victim, forwarding every message.
struct Relay {
  NodeId victim;
};

/// An active verifier advertising a wrong location to passive verifiers.
struct FakeLocationReport {
  std::optional<Position> claimed_pos;
  double distance_offset_m = 0.0;
};

/// An active verifier that makes its challenge available to the prover
/// `advance_s` early in a `pr_ch` fraction of rounds and hides the lead in
/// its own next emission.
struct EarlyChallenge {
  double advance_s = 0.0;
  double pr_ch = 0.0;
};

/// Participates without a registry certificate.
struct NodeInsertion {};

} // namespace policy

using AdversaryPolicy =
    std::variant<policy::Honest, policy::GuessAhead, policy::SelectiveDelay, policy::Relay,
                 policy::FakeLocationReport, policy::EarlyChallenge, policy::NodeInsertion>;

std::string_view policy_name(const AdversaryPolicy &p);

inline bool is_honest(const AdversaryPolicy &p) {
  return std::holds_alternative<policy::Honest>(p);
}

} // namespace gdb
