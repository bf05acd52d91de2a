#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "gdb/core_types.hpp"

namespace gdb::estimate {

/// Timings a passive verifier V_p overhears during one active round between
/// V_a and P, all on V_p's local clock.
struct PassiveObservation {
  double T1 = 0.0;  ///< arrival of V_a's challenge
  double T2 = 0.0;  ///< arrival of P's response
  double T3 = 0.0;  ///< arrival of V_a's next message
  double alpha_P = 0.0;
  double alpha_Va = 0.0;
  double d_va_vp = 0.0;  ///< advertised distance V_a to V_p
  std::optional<Position> va_pos;
  std::optional<Position> vp_pos;
  double c = kSpeedOfLight;
  double eps_t = kEpsTime;
  double eps_d = kEpsDist;
};

/// d(V_a, P) from the two V_a emissions bracketing P's response.
/// Throws NegativeTimeOfFlight when T3 - T1 is shorter than both alphas.
double active_distance_from_T1_T3(const PassiveObservation &obs);

/// Distance sum d(V_a,P) + d(V_p,P).
double gamma(const PassiveObservation &obs);

/// d(V_p, P) = gamma - d(V_a, P). Throws NegativeBound if negative.
double passive_bound_direct(const PassiveObservation &obs);

/// Bound without trusting the V_a direction: the farthest point from V_p on
/// the distance-sum locus, i.e. (gamma + d_va_vp) / 2.
double passive_bound_annulus(const PassiveObservation &obs);

struct SumLocus {
  Position focus_a;  ///< V_a
  Position focus_p;  ///< V_p
  double gamma = 0.0;
};

struct CircleLocus {
  Position center;  ///< V_a
  double radius = 0.0;
};

/// Candidate prover positions: circle(V_a, r) meets circle(V_p, gamma - r).
/// One point on tangency, two otherwise, sorted by (x, y). Throws
/// NoIntersection when the circles miss each other.
std::vector<Position> intersect_locus_circle(const SumLocus &l, const CircleLocus &c);

/// Loci and intersections as a JSON document for plotting.
void write_loci_json(const SumLocus &l, const CircleLocus &c, std::ostream &out);

/// Unknown of the time-of-flight system: t0 or a pair flight time.
struct TofUnknown {
  bool is_t0 = false;
  NodePair pair;
};

/// One observer's view of one ring cycle: for each of the 2N messages the
/// sender and the local time the observer sent or received it.
struct CycleView {
  NodeId observer;
  std::vector<NodeId> senders;
  std::vector<std::optional<double>> local_times;
  double alpha = 0.0;
};

struct TofSystem {
  NodeId observer;
  std::vector<TofUnknown> unknowns;
  std::vector<std::vector<double>> a;  ///< rows x unknowns
  std::vector<double> b;               ///< seconds, relative to the first row
  double time_origin = 0.0;            ///< local time subtracted from b
};

struct TofSolution {
  std::map<NodePair, double> tof;  ///< seconds
  double t0 = 0.0;                 ///< relative to time_origin
  double residual = 0.0;           ///< max |Ax - b|
};

/// Message k of the cycle leaves sender(k) at t0 + sum of (hop + alpha) along
/// the chain; the observer sees it at that time plus the flight to itself.
/// Unknowns are t0, the ring edges in ring order, then the observer's chords.
/// Throws IncompleteCycle if any time is missing.
TofSystem build_tof_system(const CycleView &view, const std::vector<NodeId> &ring);

/// Gaussian elimination with partial pivoting over the first |unknowns| pivots.
/// Throws SolveFailure when a pivot falls below `pivot_tol`.
TofSolution solve_tof(const TofSystem &sys, double pivot_tol = 1e-12);

/// Numerical rank by elimination with the same tolerance.
std::size_t rank(std::vector<std::vector<double>> a, double tol = 1e-12);

} // namespace gdb::estimate
