#include "gdb/builders.hpp"

#include <cmath>
#include <numbers>

namespace gdb::builders {

namespace {

NodeSpec spec(std::uint32_t id, Position pos, Role role) {
  NodeSpec n;
  n.id = NodeId{id};
  n.pos = pos;
  n.role = role;
  return n;
}

} // namespace

std::vector<Position> random_positions(std::size_t count, Rng &rng, double extent, double min_gap) {
  std::vector<Position> out;
  while (out.size() < count) {
    Position p{(rng.uniform01() * 2 - 1) * extent, (rng.uniform01() * 2 - 1) * extent};
    bool ok = true;
    for (auto q : out) ok &= distance(p, q) >= min_gap;
    if (ok) out.push_back(p);
  }
  return out;
}

Scenario ring(const std::vector<Position> &pos, std::uint32_t n, std::uint64_t seed) {
  Scenario s;
  s.protocol = ProtocolKind::MultiPartyRing;
  s.config.n = n;
  s.rng_seed = seed;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    s.nodes.push_back(spec(static_cast<std::uint32_t>(i + 1), pos[i], Role::Peer));
  }
  return s;
}

Scenario one_way(Position verifier, Position prover, std::uint32_t n, std::uint64_t seed,
                 const std::vector<Position> &passive) {
  Scenario s;
  s.protocol = ProtocolKind::OneWayDB;
  s.config.n = n;
  s.rng_seed = seed;
  s.nodes.push_back(spec(1, verifier, Role::ActiveVerifier));
  s.nodes.push_back(spec(2, prover, Role::Prover));
  for (std::size_t i = 0; i < passive.size(); ++i) {
    s.nodes.push_back(spec(static_cast<std::uint32_t>(i + 3), passive[i], Role::PassiveVerifier));
  }
  return s;
}

Scenario mpnv(std::uint32_t N, std::uint32_t M, std::uint32_t n, std::uint32_t n_a, double d_a, std::uint64_t seed) {
  Scenario s;
  s.protocol = ProtocolKind::MPNV;
  s.config.n = n;
  s.rng_seed = seed;
  s.experiment.n_a = n_a;
  s.experiment.d_a = d_a;
  s.experiment.N = N;
  s.experiment.M = M;
  for (std::uint32_t i = 0; i < N; ++i) {
    const double a = 2 * std::numbers::pi * i / N;
    s.nodes.push_back(spec(i + 1, {400 * std::cos(a), 400 * std::sin(a)}, Role::ActiveVerifier));
  }
  const auto side = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(M))));
  for (std::uint32_t j = 0; j < M; ++j) {
    const Position p{-100.0 + 200.0 * (j % side) / std::max(1u, side), -100.0 + 200.0 * (j / side) / std::max(1u, side)};
    s.nodes.push_back(spec(N + j + 1, p, Role::Prover));
  }
  return s;
}

Scenario ntom(ProtocolKind protocol, std::uint32_t N, std::uint32_t M, std::uint32_t n, std::uint64_t seed) {
  Scenario s;
  s.protocol = protocol;
  s.config.n = n;
  s.rng_seed = seed;
  s.experiment.N = N;
  s.experiment.M = M;
  auto rng = Rng::derive(seed, 0x9E05);
  const auto pos = random_positions(N + M, rng, 300.0, 5.0);
  for (std::uint32_t i = 0; i < N + M; ++i) {
    NodeSpec node = spec(i + 1, pos[i], Role::Peer);
    node.group = i < N ? 1 : 2;
    s.nodes.push_back(node);
  }
  return s;
}

} // namespace gdb::builders
