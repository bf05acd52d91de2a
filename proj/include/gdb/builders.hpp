#pragma once

#include <vector>

#include "gdb/core.hpp"
#include "gdb/rng.hpp"

namespace gdb::builders {

/// `count` distinct positions, uniform in [-extent, extent]^2, at least
/// `min_gap` meters apart.
std::vector<Position> random_positions(std::size_t count, Rng &rng, double extent = 500.0, double min_gap = 1.0);

/// Peers with ids 1..N at the given positions.
Scenario ring(const std::vector<Position> &pos, std::uint32_t n, std::uint64_t seed);

/// ActiveVerifier 1, Prover 2, PassiveVerifiers 3.. at `passive`.
Scenario one_way(Position verifier, Position prover, std::uint32_t n, std::uint64_t seed,
                 const std::vector<Position> &passive = {});

/// N verifiers (ids 1..N, ActiveVerifier role) on a circle around M provers
/// (ids N+1..N+M) placed on a grid.
Scenario mpnv(std::uint32_t N, std::uint32_t M, std::uint32_t n, std::uint32_t n_a, double d_a, std::uint64_t seed);

/// Two groups of peers for the NtoM variants; group 1 ids 1..N, group 2 after.
Scenario ntom(ProtocolKind protocol, std::uint32_t N, std::uint32_t M, std::uint32_t n, std::uint64_t seed);

} // namespace gdb::builders
