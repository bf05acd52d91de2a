#include "doctest.h"

#include <cmath>
#include <functional>
#include <sstream>

#include "gdb/analysis.hpp"
#include "gdb/builders.hpp"
#include "gdb/errors.hpp"
#include "gdb/io.hpp"
#include "gdb/proto.hpp"

using namespace gdb;
using namespace gdb::analysis;

namespace {

ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ParseError;
}

// Finds the value column of the CSV row whose leading columns equal `key`.
std::string lookup(const std::string &csv, const std::string &key) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key, 0) == 0) return line.substr(line.rfind(',') + 1);
  }
  return "";
}

} // namespace

TEST_CASE("message counts") {
  CHECK(msg_count({Setting::MPNV, 10, {}, {}, 30, 30}, Column::Base) == 18000);
  CHECK(msg_count({Setting::MPNV, 10, 8, 0.8, 30, 30}, Column::Ours) == 12240);
  CHECK(msg_count({Setting::MPNV, 10, 6, 0.6, 30, 30}, Column::Ours) == 7020);
  CHECK(msg_count({Setting::NtoM, 10, {}, {}, 5, 5}, Column::Ours) == 200);
  CHECK(msg_count({Setting::NtoM, 10, {}, {}, 5, 5}, Column::Base) == 1000);
  CHECK(msg_count({Setting::OneToM, 10, {}, {}, {}, 10}, Column::Ours) == 210);
  CHECK(msg_count({Setting::OneToM, 10, {}, {}, {}, 10}, Column::Base) == 400);
  CHECK(msg_count({Setting::OnePNV, 4, 2, 0.5, 6, {}}, Column::Ours) == 5 * 3);
  CHECK(msg_count({Setting::OnePNV, 4, {}, {}, 6, {}}, Column::Base) == 9 * 6);
  CHECK(code_of([] { msg_count({Setting::MPNV, 10, {}, {}, 30, {}}, Column::Base); }) == ErrorCode::MissingField);
  CHECK(code_of([] { msg_count({Setting::MPNV, 10, {}, {}, 30, 30}, Column::Ours); }) == ErrorCode::MissingField);
}

TEST_CASE("time bounds") {
  TimeInput one;
  one.setting = Setting::OnePNV;
  one.n = 1;
  one.tof = {{1e-6, 2e-6}};
  CHECK(time_bound(one, Column::Base) == doctest::Approx(6e-6));

  TimeInput nm;
  nm.setting = Setting::NtoM;
  nm.n = 3;
  nm.tof = {{0, 0}, {0, 0}};
  CHECK(time_bound(nm, Column::Ours) == 0.0);
  nm.tof = {{1e-6, 3e-6}, {2e-6, 1e-6}};
  CHECK(time_bound(nm, Column::Ours) == doctest::Approx(2 * 3 * 4 * 3e-6));
  CHECK(time_bound(nm, Column::Base) == doctest::Approx(4 * 3 * 7e-6));

  TimeInput mp1v;
  mp1v.setting = Setting::MP1V;
  mp1v.n = 4;
  mp1v.tof = {{1e-6, 2e-6, 3e-6}};
  CHECK(time_bound(mp1v, Column::Base) == doctest::Approx(2 * 4 * 6e-6));
  CHECK(time_bound(mp1v, Column::Ours) == doctest::Approx(4 * 3e-6 + 3e-6));

  TimeInput missing;
  missing.setting = Setting::MPNV;
  missing.n = 2;
  CHECK(code_of([&] { time_bound(missing, Column::Base); }) == ErrorCode::MissingToF);
  TimeInput ring;
  ring.setting = Setting::OneToM;
  ring.n = 1;
  ring.tof = {{1e-6, 1e-6}};
  CHECK(code_of([&] { time_bound(ring, Column::Ours); }) == ErrorCode::MissingToF);
  ring.ring_tof = {1e-6, 2e-6, 3e-6};
  CHECK(time_bound(ring, Column::Ours) == doctest::Approx(12e-6));
}

TEST_CASE("dbc values") {
  CHECK(dbc(10, 1.0) == 0.0);
  CHECK(dbc(10, 0.0) == doctest::Approx(0.99902).epsilon(1e-5));
  CHECK(dbc(10, 0.0) == 1.0 - 1.0 / 1024.0);
  CHECK(dbc(10, 0.5) == 0.96875);
  CHECK(code_of([] { dbc(3, 1.5); }) == ErrorCode::ParamOutOfRange);

  std::vector<std::uint32_t> n(10, 10);
  std::vector<double> pr(10, 0.0);
  CHECK(dbc_avg(n, pr) == dbc(10, 0.0));
  for (int i = 0; i < 5; ++i) pr[i] = 0.5;
  CHECK(dbc_avg(n, pr) == doctest::Approx(0.98391).epsilon(1e-4));
  CHECK(dbc_avg(n, pr) == (10.0 - 5.0 / 32 - 5.0 / 1024) / 10);
  for (int i = 0; i < 5; ++i) pr[i] = 0.9;
  CHECK(dbc_avg(n, pr) == doctest::Approx(0.74951).epsilon(1e-5));
  CHECK(code_of([] { dbc_avg({1, 2}, {0.5}); }) == ErrorCode::LengthMismatch);

  CHECK(dbc_ap(2, std::vector<std::uint32_t>(10, 4), std::vector<double>(10, 0.5)) == 0.9375);
  CHECK(dbc_ap(3, {4, 0, 7}, {1.0, 1.0, 1.0}) == 1.0 - 1.0 / 8);
  CHECK(code_of([] { dbc_ap(2, {1}, {0.5, 0.5}); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("dbc properties") {
  Rng rng(13);
  for (int t = 0; t < 2000; ++t) {
    const auto n = 1 + static_cast<std::uint32_t>(rng.below(30));
    const double p = rng.uniform01();
    const double v = dbc(n, p);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(dbc(n + 1, p) >= v);
    CHECK(dbc(n, std::min(1.0, p + 0.01)) <= v);

    const auto N = 1 + rng.below(15);
    std::vector<std::uint32_t> ni(N);
    std::vector<double> pi(N);
    double mean = 0;
    for (std::size_t i = 0; i < N; ++i) {
      ni[i] = static_cast<std::uint32_t>(rng.below(20));
      pi[i] = rng.uniform01();
      mean += dbc(ni[i], pi[i]) / static_cast<double>(N);
    }
    CHECK(dbc_avg(ni, pi) == doctest::Approx(mean).epsilon(1e-12));

    const auto n_a = static_cast<std::uint32_t>(1 + rng.below(10));
    const double floor = 1.0 - std::exp2(-static_cast<double>(n_a));
    CHECK(dbc_ap(n_a, ni, pi) >= floor);
    // Strict when some verifier with passive rounds cheats less than always.
    auto np = ni;
    for (auto &x : np) x += 1;
    CHECK(dbc_ap(n_a, np, pi) > floor);
    auto more = np;
    const auto i = rng.below(N);
    more[i] += 1;
    if (pi[i] < 1.0) CHECK(dbc_ap(n_a, more, pi) > dbc_ap(n_a, np, pi));
  }
}

TEST_CASE("figure grids") {
  const auto a = figure_csv("6a");
  CHECK(a.rfind("N,n,frac_cheating,pr_ch,value\n", 0) == 0);
  CHECK(std::stod(lookup(a, "10,10,0.5,0.5,")) == doctest::Approx(0.98391).epsilon(1e-4));

  const auto c = figure_csv("6c");
  CHECK(std::count(c.begin(), c.end(), '\n') == 1 + 100);
  // Fully active still carries one closing message per pair over the base count.
  CHECK(lookup(c, "10,10,10,10,1,") == "2100");
  CHECK(msg_count({Setting::MPNV, 10, {}, {}, 10, 10}, Column::Base) + 10 * 10 == 2100);

  const auto d = figure_csv("6d");
  const double saving = 1.0 - std::stod(lookup(d, "30,30,10,0.6,6,0.6,")) / 18000.0;
  CHECK(saving == doctest::Approx(0.61));

  CHECK(figure_csv("6b") == figure_csv("6b"));
  CHECK(code_of([] { figure_csv("7z"); }) == ErrorCode::UnknownFigure);
}

TEST_CASE("closed forms match simulated counts") {
  const auto base = builders::mpnv(6, 4, 3, 3, 1.0, 2);
  ProtocolCountInput in;
  in.protocol = ProtocolKind::MPNV;
  in.n = 3;
  in.N = 6;
  in.M = 4;
  in.baseline = true;
  CHECK(reconcile(proto::run_mpnv_baseline(base).trace, protocol_msg_count(in, CountScope::Rapid), CountScope::Rapid).ok());
  CHECK(reconcile(proto::run_mpnv_baseline(base).trace, protocol_msg_count(in, CountScope::All), CountScope::All).ok());

  const auto ring = proto::run_scenario(builders::ring({{0, 0}, {100, 0}, {100, 100}, {0, 100}}, 1, 2));
  CHECK(reconcile(ring.trace, 8, CountScope::Rapid).ok());
  const auto off = reconcile(ring.trace, 9, CountScope::Rapid);
  CHECK_FALSE(off.ok());
  CHECK(off.simulated == 8);

  const auto ow = proto::run_scenario(builders::one_way({0, 0}, {3, 4}, 10, 2));
  ProtocolCountInput one;
  one.n = 10;
  CHECK(protocol_msg_count(one, CountScope::All) == 22);
  CHECK(reconcile(ow.trace, 22, CountScope::All).ok());

  CHECK(pairwise_one_way_count(1, 4) == 24);
  CHECK(pairwise_interleaved_count(1, 4) == 18);
}

TEST_CASE("scenario json") {
  auto s = builders::ring({{0, 0}, {100, 0}, {100, 100}, {0, 100}}, 2, 7);
  policy::SelectiveDelay d;
  d.per_message = {{3, 5e-8}};
  s.nodes[2].policy = d;
  const auto text = io::scenario_to_json(s);
  const auto back = io::parse_scenario(text);
  CHECK(io::scenario_to_json(back) == text);

  std::ostringstream a, b;
  simkit::write_trace_jsonl(proto::run_scenario(s).trace, a);
  simkit::write_trace_jsonl(proto::run_scenario(back).trace, b);
  CHECK(a.str() == b.str());

  CHECK(code_of([] { io::parse_scenario("{nope"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { io::parse_scenario(R"({"protocol":"OneWayDB"})"); }) == ErrorCode::MissingField);
  CHECK(code_of([] { io::parse_scenario(R"({"protocol":"OneWayDB","nodes":[],"extra":1})"); }) == ErrorCode::ParseError);
  try {
    io::parse_scenario(R"({"protocol":"MultiPartyRing","nodes":[{"id":1,"pos":[0,0],"role":"Wizard"}]})");
    FAIL("accepted an unknown role");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("nodes[0].role") != std::string::npos);
  }
}
