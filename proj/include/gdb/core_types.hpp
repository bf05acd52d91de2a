#pragma once

#include <cstdint>
#include <functional>

namespace gdb {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Default tolerances for ideal-channel runs.
inline constexpr double kEpsTime = 1e-12;  // seconds
inline constexpr double kEpsDist = 1e-6;   // meters
inline constexpr double kEpsDetect = 3 * kEpsDist;

struct NodeId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

/// Planar coordinates in meters.
struct Position {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(Position, Position) = default;
};

double distance(Position a, Position b);

/// Unordered node pair, stored with the lower id first.
struct NodePair {
  NodeId a;
  NodeId b;

  static NodePair of(NodeId x, NodeId y) { return x < y ? NodePair{x, y} : NodePair{y, x}; }

  friend constexpr auto operator<=>(NodePair, NodePair) = default;
};

} // namespace gdb

template <> struct std::hash<gdb::NodeId> {
  std::size_t operator()(gdb::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
