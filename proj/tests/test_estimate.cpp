#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "gdb/builders.hpp"
#include "gdb/errors.hpp"
#include "gdb/estimate.hpp"

using namespace gdb;
using namespace gdb::estimate;

namespace {

constexpr double c = kSpeedOfLight;

ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ParseError;
}

// Timings V_p would see for an honest round, built straight from geometry.
PassiveObservation observe(Position va, Position vp, Position p, double alpha_p = 0, double alpha_va = 0,
                           double t0 = 1.5e-3) {
  PassiveObservation o;
  const double d_ap = distance(va, p), d_av = distance(va, vp), d_pv = distance(p, vp);
  o.T1 = t0 + d_av / c;
  o.T2 = t0 + d_ap / c + alpha_p + d_pv / c;
  o.T3 = t0 + 2 * d_ap / c + alpha_p + alpha_va + d_av / c;
  o.alpha_P = alpha_p;
  o.alpha_Va = alpha_va;
  o.d_va_vp = d_av;
  o.va_pos = va;
  o.vp_pos = vp;
  return o;
}

std::size_t unknown(const TofSystem &sys, int a, int b) {
  const auto want = NodePair::of(NodeId{static_cast<std::uint32_t>(a)}, NodeId{static_cast<std::uint32_t>(b)});
  for (std::size_t i = 0; i < sys.unknowns.size(); ++i) {
    if (!sys.unknowns[i].is_t0 && sys.unknowns[i].pair == want) return i;
  }
  FAIL("unknown not present");
  return 0;
}

// Reception and send times of one honest cycle, seen by `observer`.
CycleView honest_cycle(const std::vector<Position> &pos, const std::vector<NodeId> &ring, NodeId observer, double alpha,
                       double offset) {
  const std::size_t N = ring.size();
  std::vector<NodeId> senders(ring.begin(), ring.end());
  senders.push_back(ring[0]);
  for (std::size_t i = N - 1; i >= 1; --i) senders.push_back(ring[i]);
  auto at = [&](NodeId id) { return pos[id.value - 1]; };
  CycleView v;
  v.observer = observer;
  v.alpha = alpha;
  v.senders = senders;
  double t = 0.0;
  for (std::size_t k = 0; k < senders.size(); ++k) {
    if (k > 0) t += distance(at(senders[k - 1]), at(senders[k])) / c + alpha;
    const double seen = senders[k] == observer ? t : t + distance(at(senders[k]), at(observer)) / c;
    v.local_times.push_back(seen + offset);
  }
  return v;
}

} // namespace

TEST_CASE("active distance from the bracketing emissions") {
  const auto o = observe({0, 0}, {0, 10}, {-7, -7});
  CHECK(o.T3 - o.T1 == doctest::Approx(2 * std::sqrt(98.0) / c).epsilon(1e-12));
  CHECK(active_distance_from_T1_T3(o) == doctest::Approx(std::sqrt(98.0)).epsilon(1e-9));

  PassiveObservation slow;
  slow.alpha_P = 10e-9;
  slow.T1 = 0;
  slow.T3 = 2 * 3 / c + 10e-9;
  CHECK(active_distance_from_T1_T3(slow) == doctest::Approx(3.0).epsilon(1e-9));

  PassiveObservation zero;
  zero.alpha_P = 4e-9;
  zero.alpha_Va = 6e-9;
  zero.T1 = 1e-6;
  zero.T3 = zero.T1 + 10e-9;
  CHECK(std::fabs(active_distance_from_T1_T3(zero)) < 1e-9);
  zero.T3 -= 1e-9;
  CHECK(code_of([&] { active_distance_from_T1_T3(zero); }) == ErrorCode::NegativeTimeOfFlight);
}

TEST_CASE("direct passive bound") {
  const auto o = observe({0, 0}, {0, 10}, {-7, -7});
  CHECK(gamma(o) == doctest::Approx(std::sqrt(98.0) + std::sqrt(338.0)).epsilon(1e-12));
  CHECK(passive_bound_direct(o) == doctest::Approx(std::sqrt(338.0)).epsilon(1e-9));

  const auto same = observe({0, 0}, {0, 10}, {0, 0});
  CHECK(gamma(same) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(passive_bound_direct(same) == doctest::Approx(10.0).epsilon(1e-9));

  auto cheat = o;
  cheat.T2 = cheat.T1 - 1e-8;
  CHECK(code_of([&] { passive_bound_direct(cheat); }) == ErrorCode::NegativeBound);
}

TEST_CASE("an early challenge shortens the passive bound by c*tau") {
  auto o = observe({0, 0}, {0, 10}, {-7, -7});
  const double before = passive_bound_direct(o);
  const double tau = 5e-9;
  o.T2 -= tau;
  CHECK(before - passive_bound_direct(o) == doctest::Approx(c * tau).epsilon(1e-9));
}

TEST_CASE("passive bound rises strictly with delta 1") {
  const auto o = observe({0, 0}, {40, 10}, {-20, 35});
  double last = passive_bound_direct(o);
  for (int k = 1; k <= 20; ++k) {
    auto later = o;
    later.T2 += k * 1e-9;
    const double b = passive_bound_direct(later);
    CHECK(b > last);
    last = b;
  }
}

TEST_CASE("locus and circle intersections") {
  const SumLocus fig{{0, 0}, {0, 10}, std::sqrt(98.0) + std::sqrt(338.0)};
  const auto pts = intersect_locus_circle(fig, {{0, 0}, std::sqrt(98.0)});
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].x == doctest::Approx(-7.0).epsilon(1e-12));
  CHECK(pts[0].y == doctest::Approx(-7.0).epsilon(1e-12));
  CHECK(pts[1].x == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(pts[1].y == doctest::Approx(-7.0).epsilon(1e-12));

  // Tangent on the segment between the foci.
  const auto inner = intersect_locus_circle({{0, 0}, {0, 10}, 10.0}, {{0, 0}, 4.0});
  REQUIRE(inner.size() == 1);
  CHECK(inner[0].x == doctest::Approx(0.0));
  CHECK(inner[0].y == doctest::Approx(4.0));

  // Tangent behind V_a, on the axis away from V_p.
  const auto behind = intersect_locus_circle({{0, 0}, {0, 10}, 18.0}, {{0, 0}, 4.0});
  REQUIRE(behind.size() == 1);
  CHECK(behind[0].y == doctest::Approx(-4.0));

  CHECK(code_of([&] { intersect_locus_circle({{0, 0}, {0, 10}, 3.0}, {{0, 0}, 4.0}); }) == ErrorCode::NoIntersection);
  CHECK(code_of([&] { intersect_locus_circle({{0, 0}, {0, 10}, 30.0}, {{0, 0}, 4.0}); }) == ErrorCode::NoIntersection);

  std::ostringstream os;
  write_loci_json(fig, {{0, 0}, std::sqrt(98.0)}, os);
  CHECK(os.str().find("intersections") != std::string::npos);
}

TEST_CASE("direct bound equals the distance to either candidate point") {
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const auto p = builders::random_positions(3, rng, 300.0, 1.0);
    const auto o = observe(p[0], p[1], p[2]);
    const double bound = passive_bound_direct(o);
    const auto pts = intersect_locus_circle({p[0], p[1], gamma(o)}, {p[0], active_distance_from_T1_T3(o)});
    REQUIRE(!pts.empty());
    for (auto s : pts) CHECK(std::fabs(distance(p[1], s) - bound) < 1e-6);
    CHECK(std::fabs(bound - distance(p[1], p[2])) < kEpsDist);
  }
}

TEST_CASE("annulus bound") {
  const auto fig = observe({0, 0}, {0, 10}, {-7, -7});
  CHECK(passive_bound_annulus(fig) >= 18.3848);
  CHECK(passive_bound_annulus(fig) == doctest::Approx((gamma(fig) + 10.0) / 2));
  CHECK(passive_bound_annulus(observe({0, 0}, {0, 10}, {0, 0})) == doctest::Approx(10.0));

  Rng rng(32);
  for (int t = 0; t < 500; ++t) {
    const auto p = builders::random_positions(3, rng, 300.0, 0.5);
    const auto o = observe(p[0], p[1], p[2], rng.uniform01() * 1e-8, rng.uniform01() * 1e-8);
    CHECK(passive_bound_annulus(o) >= passive_bound_direct(o) - 1e-9);
  }
}

TEST_CASE("four-node system rows") {
  const std::vector<Position> pos{{0, 0}, {100, 0}, {100, 100}, {0, 100}};
  const std::vector<NodeId> ring{NodeId{1}, NodeId{2}, NodeId{3}, NodeId{4}};
  const auto sys = build_tof_system(honest_cycle(pos, ring, NodeId{1}, 0.0, 0.0), ring);
  REQUIRE(sys.a.size() == 8);
  CHECK(sys.unknowns.size() == 6);
  CHECK(sys.unknowns[0].is_t0);

  const auto e12 = unknown(sys, 1, 2), e23 = unknown(sys, 2, 3), e34 = unknown(sys, 3, 4), e14 = unknown(sys, 1, 4),
             c13 = unknown(sys, 1, 3);
  auto row = [&](std::size_t k) {
    std::vector<double> r(sys.unknowns.size(), 0.0);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = sys.a[k][j] - sys.a[0][j];
    return r;
  };
  auto expect = [&](std::size_t k, std::vector<std::pair<std::size_t, double>> coeffs) {
    std::vector<double> want(sys.unknowns.size(), 0.0);
    for (auto [j, v] : coeffs) want[j] += v;
    CHECK(row(k) == want);
  };
  expect(1, {{e12, 2}});
  expect(2, {{e12, 1}, {e23, 1}, {c13, 1}});
  expect(3, {{e12, 1}, {e23, 1}, {e34, 1}, {e14, 1}});
  expect(4, {{e12, 1}, {e23, 1}, {e34, 1}, {e14, 1}});
  expect(5, {{e12, 1}, {e23, 1}, {e34, 1}, {e14, 3}});
  expect(6, {{e12, 1}, {e23, 1}, {e34, 2}, {e14, 2}, {c13, 1}});
  expect(7, {{e12, 2}, {e23, 2}, {e34, 2}, {e14, 2}});

  // P2 reads 2 t(P1,P4) off the gap between messages 4 and 6.
  const auto s2 = build_tof_system(honest_cycle(pos, ring, NodeId{2}, 0.0, 0.0), ring);
  const auto f14 = unknown(s2, 1, 4);
  for (std::size_t j = 0; j < s2.unknowns.size(); ++j) {
    CHECK(s2.a[5][j] - s2.a[3][j] == (j == f14 ? 2.0 : 0.0));
  }
  CHECK(s2.b[5] - s2.b[3] == doctest::Approx(2 * 100 / c).epsilon(1e-12));
}

TEST_CASE("system rank is 2N-2") {
  Rng rng(41);
  for (std::size_t N = 4; N <= 8; ++N) {
    const auto pos = builders::random_positions(N, rng);
    std::vector<NodeId> ring;
    for (std::uint32_t i = 1; i <= N; ++i) ring.push_back(NodeId{i});
    rng.shuffle(ring);
    const auto sys = build_tof_system(honest_cycle(pos, ring, ring[rng.below(N)], 0.0, 0.0), ring);
    CHECK(sys.unknowns.size() == 2 * N - 2);
    CHECK(rank(sys.a) == 2 * N - 2);
  }
}

TEST_CASE("solver recovers geometric flight times regardless of clock offset") {
  Rng rng(42);
  for (int t = 0; t < 100; ++t) {
    const std::size_t N = 4 + rng.below(5);
    const auto pos = builders::random_positions(N, rng);
    std::vector<NodeId> ring;
    for (std::uint32_t i = 1; i <= N; ++i) ring.push_back(NodeId{i});
    rng.shuffle(ring);
    const NodeId obs = ring[rng.below(N)];
    const double alpha = rng.uniform01() * 1e-7;
    const auto sol = solve_tof(build_tof_system(honest_cycle(pos, ring, obs, alpha, rng.uniform01()), ring));
    CHECK(sol.residual < 1e-10);
    for (const auto &[pair, v] : sol.tof) {
      CHECK(std::fabs(v - distance(pos[pair.a.value - 1], pos[pair.b.value - 1]) / c) < kEpsTime);
    }
    CHECK(sol.tof.size() == 2 * N - 3);
  }
}

TEST_CASE("solver failures") {
  TofSystem zero;
  zero.unknowns.resize(3);
  zero.unknowns[0].is_t0 = true;
  zero.a.assign(4, std::vector<double>(3, 0.0));
  zero.b.assign(4, 0.0);
  CHECK(code_of([&] { solve_tof(zero); }) == ErrorCode::SolveFailure);

  const std::vector<Position> pos{{0, 0}, {100, 0}, {100, 100}, {0, 100}};
  const std::vector<NodeId> ring{NodeId{1}, NodeId{2}, NodeId{3}, NodeId{4}};
  auto v = honest_cycle(pos, ring, NodeId{3}, 0.0, 0.0);
  v.local_times[5].reset();
  CHECK(code_of([&] { build_tof_system(v, ring); }) == ErrorCode::IncompleteCycle);
}
