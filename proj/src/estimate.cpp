#include "gdb/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"

#include "gdb/errors.hpp"

namespace gdb::estimate {

double active_distance_from_T1_T3(const PassiveObservation &obs) {
  const double t = ((obs.T3 - obs.T1) - obs.alpha_P - obs.alpha_Va) / 2.0;
  if (t < -obs.eps_t) {
    throw Error(ErrorCode::NegativeTimeOfFlight,
                "T3 - T1 = " + std::to_string(obs.T3 - obs.T1) + " s is shorter than the processing times");
  }
  return obs.c * std::max(t, 0.0);
}

double gamma(const PassiveObservation &obs) {
  return obs.c * ((obs.T2 - obs.T1) - obs.alpha_P) + obs.d_va_vp;
}

double passive_bound_direct(const PassiveObservation &obs) {
  const double bound = gamma(obs) - active_distance_from_T1_T3(obs);
  if (bound < -obs.eps_d) {
    throw Error(ErrorCode::NegativeBound, "distance sum is shorter than d(V_a, P) by " + std::to_string(-bound) + " m");
  }
  return std::max(bound, 0.0);
}

double passive_bound_annulus(const PassiveObservation &obs) {
  // Validates the observation the same way the direct bound does.
  (void)passive_bound_direct(obs);
  return (gamma(obs) + obs.d_va_vp) / 2.0;
}

std::vector<Position> intersect_locus_circle(const SumLocus &l, const CircleLocus &c) {
  if (!(l.focus_a == c.center)) {
    throw Error(ErrorCode::ParamOutOfRange, "circle must be centred on the locus focus V_a");
  }
  const double r1 = c.radius;
  const double r2 = l.gamma - c.radius;
  const double dx = l.focus_p.x - l.focus_a.x;
  const double dy = l.focus_p.y - l.focus_a.y;
  const double d = std::hypot(dx, dy);
  const double scale = std::max({1.0, r1, std::abs(r2), d});
  const double tol = 1e-9 * scale;
  if (r1 < -tol || r2 < -tol || d < tol || d > r1 + r2 + tol || d < std::abs(r1 - r2) - tol) {
    throw Error(ErrorCode::NoIntersection, "radius " + std::to_string(r1) + " m and distance sum " +
                                               std::to_string(l.gamma) + " m are inconsistent");
  }
  const double along = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  const double h2 = r1 * r1 - along * along;
  const double ux = dx / d, uy = dy / d;
  const Position base{l.focus_a.x + along * ux, l.focus_a.y + along * uy};
  if (h2 <= tol * tol) return {base};
  const double h = std::sqrt(h2);
  std::vector<Position> out{{base.x - h * uy, base.y + h * ux}, {base.x + h * uy, base.y - h * ux}};
  std::sort(out.begin(), out.end(), [](Position a, Position b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  return out;
}

void write_loci_json(const SumLocus &l, const CircleLocus &c, std::ostream &out) {
  using nlohmann::json;
  json points = json::array();
  try {
    for (auto p : intersect_locus_circle(l, c)) points.push_back({p.x, p.y});
  } catch (const Error &) {
  }
  json j = {{"sum_locus", {{"focus_a", {l.focus_a.x, l.focus_a.y}}, {"focus_p", {l.focus_p.x, l.focus_p.y}}, {"gamma", l.gamma}}},
            {"circle", {{"center", {c.center.x, c.center.y}}, {"radius", c.radius}}},
            {"intersections", points}};
  out << j.dump(2) << '\n';
}

namespace {

std::size_t unknown_index(std::vector<TofUnknown> &unknowns, NodePair p) {
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    if (!unknowns[i].is_t0 && unknowns[i].pair == p) return i;
  }
  unknowns.push_back(TofUnknown{false, p});
  return unknowns.size() - 1;
}

} // namespace

TofSystem build_tof_system(const CycleView &view, const std::vector<NodeId> &ring) {
  const std::size_t n = ring.size();
  if (view.senders.empty() || view.senders.size() != view.local_times.size()) {
    throw Error(ErrorCode::IncompleteCycle, "observer " + std::to_string(view.observer.value) + " has no complete cycle");
  }
  for (std::size_t k = 0; k < view.local_times.size(); ++k) {
    if (!view.local_times[k]) {
      throw Error(ErrorCode::IncompleteCycle,
                  "observer " + std::to_string(view.observer.value) + " is missing message " + std::to_string(k + 1));
    }
  }

  TofSystem sys;
  sys.observer = view.observer;
  sys.unknowns.push_back(TofUnknown{true, {}});
  for (std::size_t i = 0; i < n; ++i) sys.unknowns.push_back(TofUnknown{false, NodePair::of(ring[i], ring[(i + 1) % n])});
  const auto pos = std::find(ring.begin(), ring.end(), view.observer);
  if (pos != ring.end()) {
    const std::size_t o = static_cast<std::size_t>(pos - ring.begin());
    for (std::size_t step = 2; step + 1 < n; ++step) {
      sys.unknowns.push_back(TofUnknown{false, NodePair::of(view.observer, ring[(o + step) % n])});
    }
  }

  sys.time_origin = *view.local_times.front();
  std::vector<double> path(sys.unknowns.size(), 0.0);  // coefficients of s_k
  path[0] = 1.0;
  for (std::size_t k = 0; k < view.senders.size(); ++k) {
    double hops_alpha = 0.0;
    if (k > 0) {
      if (view.senders[k] != view.senders[k - 1]) {
        const auto idx = unknown_index(sys.unknowns, NodePair::of(view.senders[k - 1], view.senders[k]));
        path.resize(sys.unknowns.size(), 0.0);
        path[idx] += 1.0;
      }
      hops_alpha = view.alpha * static_cast<double>(k);
    }
    path.resize(sys.unknowns.size(), 0.0);
    std::vector<double> row = path;
    if (view.senders[k] != view.observer) {
      const auto idx = unknown_index(sys.unknowns, NodePair::of(view.senders[k], view.observer));
      row.resize(sys.unknowns.size(), 0.0);
      row[idx] += 1.0;
    }
    sys.a.push_back(std::move(row));
    sys.b.push_back(*view.local_times[k] - sys.time_origin - hops_alpha);
  }
  for (auto &row : sys.a) row.resize(sys.unknowns.size(), 0.0);
  return sys;
}

TofSolution solve_tof(const TofSystem &sys, double pivot_tol) {
  const std::size_t m = sys.a.size();
  const std::size_t n = sys.unknowns.size();
  if (m < n) {
    throw Error(ErrorCode::SolveFailure, std::to_string(m) + " equations for " + std::to_string(n) + " unknowns");
  }
  auto a = sys.a;
  auto b = sys.b;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < pivot_tol) {
      throw Error(ErrorCode::SolveFailure, "singular system at unknown " + std::to_string(col));
    }
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }

  TofSolution out;
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += sys.a[r][j] * x[j];
    out.residual = std::max(out.residual, std::abs(s - sys.b[r]));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (sys.unknowns[j].is_t0) {
      out.t0 = x[j];
    } else {
      out.tof[sys.unknowns[j].pair] = x[j];
    }
  }
  return out;
}

std::size_t rank(std::vector<std::vector<double>> a, double tol) {
  if (a.empty()) return 0;
  const std::size_t m = a.size(), n = a.front().size();
  std::size_t r = 0;
  for (std::size_t col = 0; col < n && r < m; ++col) {
    std::size_t piv = r;
    for (std::size_t i = r + 1; i < m; ++i) {
      if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
    }
    if (std::abs(a[piv][col]) < tol) continue;
    std::swap(a[piv], a[r]);
    for (std::size_t i = r + 1; i < m; ++i) {
      const double f = a[i][col] / a[r][col];
      for (std::size_t j = col; j < n; ++j) a[i][j] -= f * a[r][j];
    }
    ++r;
  }
  return r;
}

} // namespace gdb::estimate
