#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gdb/core.hpp"
#include "gdb/simkit.hpp"

namespace gdb::analysis {

enum class Setting { MPNV, OnePNV, MP1V, OneToM, NtoM };
enum class Column { Base, Ours };

std::string_view to_string(Setting s);
std::optional<Setting> parse_setting(std::string_view s);

struct CountFormulaInput {
  Setting setting = Setting::MPNV;
  std::optional<std::uint32_t> n;
  std::optional<std::uint32_t> n_a;
  std::optional<double> d_a;
  std::optional<std::uint32_t> N;
  std::optional<std::uint32_t> M;
};

/// Rapid-phase message count of a setting. The active verifier count N * d_a
/// is rounded as active_count does. Throws MissingField.
std::int64_t msg_count(const CountFormulaInput &in, Column which);

struct TimeInput {
  Setting setting = Setting::MPNV;
  std::uint32_t n = 0;
  std::optional<std::uint32_t> n_a;
  std::optional<double> d_a;
  /// Flight times, seconds. Rows: verifiers (MPNV), the single prover (1PNV),
  /// the single verifier (MP1V), the initiator (1toM) or group 1 (NtoM).
  /// Columns: the other side.
  std::vector<std::vector<double>> tof;
  /// 1toM ours: the M + 1 consecutive hop times around the ring.
  std::vector<double> ring_tof;
};

/// Total protocol time. Throws MissingToF or MissingField.
double time_bound(const TimeInput &in, Column which);

/// 1 - 2^(n (pr - 1)).
double dbc(std::uint32_t n, double pr_ch);

/// (N - sum 2^(n_i (pr_i - 1))) / N. Throws LengthMismatch.
double dbc_avg(const std::vector<std::uint32_t> &n_i, const std::vector<double> &pr_i);

/// 1 - 2^-n_a * sum 2^(n_p(i) (pr_i - 1)) / N. Throws LengthMismatch.
double dbc_ap(std::uint32_t n_a, const std::vector<std::uint32_t> &n_p, const std::vector<double> &pr_i);

/// CSV for one Fig. 6 panel ("6a".."6d"); throws UnknownFigure.
void emit_figure_data(const std::string &which, std::ostream &out);
std::string figure_csv(const std::string &which);

enum class CountScope { Rapid, All };

/// Closed-form emission count of a simulated protocol run.
struct ProtocolCountInput {
  ProtocolKind protocol = ProtocolKind::OneWayDB;
  std::uint32_t n = 1;
  std::uint32_t C = 2;
  std::uint32_t N = 0;  ///< verifiers, ring size, group 1, ...
  std::uint32_t M = 0;  ///< provers, participants, group 2, ...
  std::optional<std::uint32_t> n_a, n_a2;
  std::optional<double> d_a, d_2;
  bool trailing_ack = false;  ///< OneWayDB with passive observers
  bool baseline = false;      ///< MPNV: every verifier fully active
};
std::int64_t protocol_msg_count(const ProtocolCountInput &in, CountScope scope);

/// Sequential pairwise baselines among N peers.
std::int64_t pairwise_one_way_count(std::uint32_t n, std::uint32_t N);
std::int64_t pairwise_interleaved_count(std::uint32_t n, std::uint32_t N);

struct ReconcileReport {
  std::int64_t expected = 0;
  std::int64_t simulated = 0;
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

ReconcileReport reconcile(const simkit::Trace &trace, std::int64_t closed_form, CountScope scope);

} // namespace gdb::analysis
