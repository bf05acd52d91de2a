#include "gdb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "gdb/errors.hpp"

namespace gdb::analysis {

std::string_view to_string(Setting s) {
  switch (s) {
  case Setting::MPNV: return "MPNV";
  case Setting::OnePNV: return "1PNV";
  case Setting::MP1V: return "MP1V";
  case Setting::OneToM: return "1toM";
  case Setting::NtoM: return "NtoM";
  }
  return "?";
}

std::optional<Setting> parse_setting(std::string_view s) {
  for (auto v : {Setting::MPNV, Setting::OnePNV, Setting::MP1V, Setting::OneToM, Setting::NtoM}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

namespace {

template <typename T> T need(const std::optional<T> &v, const char *name, Setting s) {
  if (!v) throw Error(ErrorCode::MissingField, std::string(name) + " is required for " + std::string(to_string(s)));
  return *v;
}

std::int64_t i64(std::uint32_t v) { return static_cast<std::int64_t>(v); }

} // namespace

std::int64_t msg_count(const CountFormulaInput &in, Column which) {
  const auto s = in.setting;
  const auto n = i64(need(in.n, "n", s));
  const bool ours = which == Column::Ours;
  switch (s) {
  case Setting::MPNV: {
    const auto N = need(in.N, "N", s);
    const auto M = i64(need(in.M, "M", s));
    if (!ours) return 2 * n * i64(N) * M;
    const auto n_a = i64(need(in.n_a, "n_a", s));
    return (2 * n_a + 1) * i64(active_count(need(in.d_a, "d_a", s), N)) * M;
  }
  case Setting::OnePNV: {
    const auto N = need(in.N, "N", s);
    if (!ours) return (2 * n + 1) * i64(N);
    const auto n_a = i64(need(in.n_a, "n_a", s));
    return (2 * n_a + 1) * i64(active_count(need(in.d_a, "d_a", s), N));
  }
  case Setting::MP1V: {
    const auto M = i64(need(in.M, "M", s));
    if (!ours) return (2 * n + 1) * M;
    std::int64_t total = 2 * n;
    for (std::int64_t j = 1; j <= M - 1; ++j) total += (j + 1) * (n - ((M - 1) - j));
    return total;
  }
  case Setting::OneToM: {
    const auto M = i64(need(in.M, "M", s));
    return ours ? n * (2 * M + 1) : 4 * n * M;
  }
  case Setting::NtoM: {
    const auto N = i64(need(in.N, "N", s));
    const auto M = i64(need(in.M, "M", s));
    return ours ? 2 * n * (N + M) : 4 * n * N * M;
  }
  }
  return 0;
}

namespace {

void check_tof(const TimeInput &in, std::size_t rows) {
  if (in.tof.empty() || in.tof.front().empty()) {
    throw Error(ErrorCode::MissingToF, "no flight times for " + std::string(to_string(in.setting)));
  }
  if (rows && in.tof.size() != rows) {
    throw Error(ErrorCode::MissingToF, std::string(to_string(in.setting)) + " expects " + std::to_string(rows) + " row");
  }
  for (const auto &r : in.tof) {
    if (r.size() != in.tof.front().size()) throw Error(ErrorCode::MissingToF, "flight time table is ragged");
    for (double v : r) {
      if (!std::isfinite(v) || v < 0) throw Error(ErrorCode::MissingToF, "flight times must be finite and >= 0");
    }
  }
}

double row_sum(const std::vector<double> &r, std::size_t count) {
  return std::accumulate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(std::min(count, r.size())), 0.0);
}

} // namespace

double time_bound(const TimeInput &in, Column which) {
  const double n = in.n;
  const bool ours = which == Column::Ours;
  switch (in.setting) {
  case Setting::MPNV: {
    check_tof(in, 0);
    if (!ours) {
      double s = 0;
      for (const auto &r : in.tof) s += row_sum(r, r.size());
      return 2 * n * s;
    }
    const double n_a = need(in.n_a, "n_a", in.setting);
    const auto k = active_count(need(in.d_a, "d_a", in.setting), in.tof.size());
    double s = 0;
    for (std::size_t j = 0; j < k; ++j) s += row_sum(in.tof[j], in.tof[j].size());
    return (2 * n_a + 1) * s;
  }
  case Setting::OnePNV: {
    check_tof(in, 1);
    const auto &r = in.tof.front();
    if (!ours) return 2 * n * row_sum(r, r.size());
    const double n_a = need(in.n_a, "n_a", in.setting);
    return (2 * n_a + 1) * row_sum(r, active_count(need(in.d_a, "d_a", in.setting), r.size()));
  }
  case Setting::MP1V: {
    check_tof(in, 1);
    const auto &r = in.tof.front();
    if (!ours) return 2 * n * row_sum(r, r.size());
    return n * *std::max_element(r.begin(), r.end()) + row_sum(r, r.size() - 1);
  }
  case Setting::OneToM: {
    check_tof(in, 1);
    const auto &r = in.tof.front();
    if (!ours) return 4 * n * row_sum(r, r.size());
    if (in.ring_tof.size() != r.size() + 1) {
      throw Error(ErrorCode::MissingToF, "1toM needs " + std::to_string(r.size() + 1) + " ring hop times");
    }
    return 2 * n * row_sum(in.ring_tof, in.ring_tof.size());
  }
  case Setting::NtoM: {
    check_tof(in, 0);
    double s = 0, mx = 0;
    for (const auto &r : in.tof) {
      s += row_sum(r, r.size());
      mx = std::max(mx, *std::max_element(r.begin(), r.end()));
    }
    const double N = static_cast<double>(in.tof.size());
    const double M = static_cast<double>(in.tof.front().size());
    return ours ? 2 * n * (N + M) * mx : 4 * n * s;
  }
  }
  return 0;
}

namespace {

double cheat_term(std::uint32_t n, double pr) {
  if (!(pr >= 0.0 && pr <= 1.0)) throw Error(ErrorCode::ParamOutOfRange, "Pr_ch must lie in [0, 1]");
  return std::exp2(static_cast<double>(n) * (pr - 1.0));
}

} // namespace

double dbc(std::uint32_t n, double pr_ch) { return 1.0 - cheat_term(n, pr_ch); }

double dbc_avg(const std::vector<std::uint32_t> &n_i, const std::vector<double> &pr_i) {
  if (n_i.size() != pr_i.size() || n_i.empty()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(n_i.size()) + " round counts vs " + std::to_string(pr_i.size()) +
                                               " cheating probabilities");
  }
  double s = 0;
  for (std::size_t i = 0; i < n_i.size(); ++i) s += cheat_term(n_i[i], pr_i[i]);
  const double N = static_cast<double>(n_i.size());
  return (N - s) / N;
}

double dbc_ap(std::uint32_t n_a, const std::vector<std::uint32_t> &n_p, const std::vector<double> &pr_i) {
  if (n_p.size() != pr_i.size() || n_p.empty()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(n_p.size()) + " passive counts vs " + std::to_string(pr_i.size()) +
                                               " cheating probabilities");
  }
  double s = 0;
  for (std::size_t i = 0; i < n_p.size(); ++i) s += cheat_term(n_p[i], pr_i[i]);
  return 1.0 - std::exp2(-static_cast<double>(n_a)) * s / static_cast<double>(n_p.size());
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double tenth(int i) { return i / 10.0; }

} // namespace

void emit_figure_data(const std::string &which, std::ostream &out) {
  if (which == "6a") {
    // DBC_avg, N = 10 verifiers, n = 10; a fraction of them cheat with Pr_ch.
    const std::uint32_t N = 10, n = 10;
    out << "N,n,frac_cheating,pr_ch,value\n";
    for (int f = 0; f <= 10; ++f) {
      for (int p = 0; p <= 10; ++p) {
        const auto cheaters = static_cast<std::size_t>(std::llround(tenth(f) * N));
        std::vector<std::uint32_t> rounds(N, n);
        std::vector<double> pr(N, 0.0);
        std::fill(pr.begin(), pr.begin() + static_cast<std::ptrdiff_t>(cheaters), tenth(p));
        out << N << ',' << n << ',' << num(tenth(f)) << ',' << num(tenth(p)) << ',' << num(dbc_avg(rounds, pr)) << '\n';
      }
    }
  } else if (which == "6b") {
    // DBC_a/p, N = 10, n_a = 2, every verifier offers n_p passive rounds.
    const std::uint32_t N = 10, n_a = 2;
    out << "N,n_a,n_p,pr_ch,value\n";
    for (std::uint32_t np = 0; np <= 8; ++np) {
      for (int p = 0; p <= 10; ++p) {
        std::vector<std::uint32_t> n_p(N, np);
        std::vector<double> pr(N, tenth(p));
        out << N << ',' << n_a << ',' << np << ',' << num(tenth(p)) << ',' << num(dbc_ap(n_a, n_p, pr)) << '\n';
      }
    }
  } else if (which == "6c") {
    const std::uint32_t N = 10, M = 10, n = 10;
    out << "N,M,n,n_a,d_a,value\n";
    for (std::uint32_t na = 1; na <= 10; ++na) {
      for (int d = 1; d <= 10; ++d) {
        CountFormulaInput in{Setting::MPNV, n, na, tenth(d), N, M};
        out << N << ',' << M << ',' << n << ',' << na << ',' << num(tenth(d)) << ',' << msg_count(in, Column::Ours) << '\n';
      }
    }
  } else if (which == "6d") {
    // N = M, n_a = f n and d_a = f.
    const std::uint32_t n = 10;
    out << "N,M,n,f,n_a,d_a,value\n";
    for (std::uint32_t N = 10; N <= 50; N += 10) {
      for (int f = 1; f <= 10; ++f) {
        const auto na = static_cast<std::uint32_t>(std::llround(tenth(f) * n));
        CountFormulaInput in{Setting::MPNV, n, na, tenth(f), N, N};
        out << N << ',' << N << ',' << n << ',' << num(tenth(f)) << ',' << na << ',' << num(tenth(f)) << ','
            << msg_count(in, Column::Ours) << '\n';
      }
    }
  } else {
    throw Error(ErrorCode::UnknownFigure, "unknown figure '" + which + "' (expected 6a, 6b, 6c or 6d)");
  }
}

std::string figure_csv(const std::string &which) {
  std::ostringstream os;
  emit_figure_data(which, os);
  return os.str();
}

std::int64_t protocol_msg_count(const ProtocolCountInput &in, CountScope scope) {
  const auto n = i64(in.n), C = i64(in.C), N = i64(in.N), M = i64(in.M);
  const bool all = scope == CountScope::All;
  switch (in.protocol) {
  case ProtocolKind::OneWayDB: return 2 * n + (in.trailing_ack ? 1 : 0) + (all ? C : 0);
  case ProtocolKind::MutualInterleaved: return 2 * n + 1 + (all ? 2 * C : 0);
  case ProtocolKind::OneToMany: return n * (2 * M + 1) + (all ? C * (M + 1) : 0);
  // Each ring node also broadcasts one report after decommitting.
  case ProtocolKind::MultiPartyRing: return 2 * n * N + (all ? (C + 1) * N : 0);
  case ProtocolKind::MPNV: {
    if (in.baseline) return 2 * n * N * M + (all ? C * N * M : 0);
    const auto k = i64(active_count(in.d_a.value_or(1.0), in.N));
    const auto na = i64(in.n_a.value_or(in.n));
    return (2 * na + 1) * k * M + (all ? C * k * M : 0);
  }
  case ProtocolKind::NtoMPassive: {
    const auto k1 = i64(active_count(in.d_a.value_or(1.0), in.N));
    const auto k2 = i64(active_count(in.d_2.value_or(1.0), in.M));
    const auto na1 = i64(in.n_a.value_or(in.n)), na2 = i64(in.n_a2.value_or(in.n));
    return (2 * na1 + 1) * k1 * M + (2 * na2 + 1) * k2 * N + (all ? C * (k1 * M + k2 * N) : 0);
  }
  case ProtocolKind::NtoMMultiParty: return 2 * n * (N + M) + (all ? (C + 1) * (N + M) : 0);
  case ProtocolKind::NtoMOneToMany: return n * N * (2 * M + 1) + (all ? N * C * (M + 1) : 0);
  }
  return 0;
}

std::int64_t pairwise_one_way_count(std::uint32_t n, std::uint32_t N) { return 2 * i64(n) * i64(N) * (i64(N) - 1); }

std::int64_t pairwise_interleaved_count(std::uint32_t n, std::uint32_t N) {
  return (2 * i64(n) + 1) * i64(N) * (i64(N) - 1) / 2;
}

ReconcileReport reconcile(const simkit::Trace &trace, std::int64_t closed_form, CountScope scope) {
  ReconcileReport r;
  r.expected = closed_form;
  r.simulated = static_cast<std::int64_t>(scope == CountScope::Rapid ? trace.count(simkit::Phase::Rapid) : trace.count_all());
  if (r.simulated != r.expected) {
    r.mismatches.push_back(std::string(scope == CountScope::Rapid ? "rapid" : "total") + " emissions: simulated " +
                           std::to_string(r.simulated) + ", closed form " + std::to_string(r.expected));
  }
  // Every emission must reach every other node exactly once.
  const auto nodes = trace.clock_offsets.size();
  const auto want = trace.emissions.size() * (nodes ? nodes - 1 : 0);
  if (trace.arrivals.size() != want) {
    r.mismatches.push_back("arrivals: " + std::to_string(trace.arrivals.size()) + ", expected " + std::to_string(want));
  }
  return r;
}

} // namespace gdb::analysis
