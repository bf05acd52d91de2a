#include "doctest.h"

#include <cmath>
#include <sstream>

#include "gdb/bits.hpp"
#include "gdb/builders.hpp"
#include "gdb/core.hpp"
#include "gdb/crypto.hpp"
#include "gdb/errors.hpp"
#include "gdb/proto.hpp"
#include "gdb/simkit.hpp"

using namespace gdb;

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

std::vector<std::uint8_t> to_bytes(const std::string &s) { return {s.begin(), s.end()}; }

} // namespace

TEST_CASE("distance") {
  CHECK(distance({0, 0}, {0, 10}) == 10.0);
  CHECK(distance({3, 4}, {3, 4}) == 0.0);
  CHECK(distance({0, 0}, {-7, -7}) == doctest::Approx(9.8995).epsilon(1e-5));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    Position a{rng.uniform01() * 100, rng.uniform01() * 100}, b{rng.uniform01() * 100, rng.uniform01() * 100};
    CHECK(distance(a, b) == distance(b, a));
  }
}

TEST_CASE("scenario validation") {
  auto ring = builders::ring({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 1, 1);
  CHECK(validate_scenario(ring).empty());

  auto two_provers = ring;
  two_provers.nodes[0].role = Role::Prover;
  two_provers.nodes[1].role = Role::Prover;
  CHECK(code_of([&] { require_valid(two_provers); }) == ErrorCode::RoleMismatch);

  auto dup = ring;
  dup.nodes[1].id = dup.nodes[0].id;
  CHECK(code_of([&] { require_valid(dup); }) == ErrorCode::DuplicateNodeId);

  auto m = builders::mpnv(4, 2, 3, 2, 1.5, 1);
  const auto v = validate_scenario(m);
  REQUIRE(!v.empty());
  CHECK(v.front().code == ErrorCode::ParamOutOfRange);
  CHECK(v.front().field.find("d_a") != std::string::npos);

  auto small = builders::ring({{0, 0}, {1, 0}, {1, 1}}, 1, 1);
  CHECK(code_of([&] { require_valid(small); }) == ErrorCode::ParamOutOfRange);
}

TEST_CASE("active verifier count rounds to nearest, at least one") {
  CHECK(active_count(0.8, 30) == 24);
  CHECK(active_count(0.6, 30) == 18);
  CHECK(active_count(0.01, 30) == 1);
  CHECK(active_count(1.0, 7) == 7);
}

TEST_CASE("bit strings") {
  CHECK(response_bits(BitString::parse("1"), BitString::parse("1")) == BitString::parse("0"));
  CHECK(response_bits(BitString::parse("1010"), BitString::parse("0110")).str() == "1100");
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto a = BitString::random(1 + rng.below(16), rng);
    const auto b = BitString::random(a.size(), rng);
    CHECK(response_bits(response_bits(a, b), b) == a);
    CHECK(BitString::parse(a.str()) == a);
  }
  const auto all = concat({BitString::parse("10"), BitString::parse("01"), BitString::parse("11")});
  CHECK(all.str() == "100111");
  CHECK(split(all, 2).at(1).str() == "01");
}

TEST_CASE("derived streams are reproducible and distinct") {
  auto a = Rng::derive(5, 1), b = Rng::derive(5, 1), c = Rng::derive(5, 2);
  const auto x = a.next();
  CHECK(x == b.next());
  CHECK(x != c.next());
}

TEST_CASE("hash") {
  CHECK(crypto::hash("abc") == crypto::hash("abc"));
  std::vector<std::uint8_t> m(16, 0);
  const auto h0 = crypto::hash(m);
  m[3] ^= 0x10;
  CHECK(h0 != crypto::hash(m));
  // SHA-256 of the empty string.
  CHECK(crypto::to_hex(crypto::hash(std::string_view{})) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("commitments bind and hide") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto bits = BitString::random(1 + rng.below(20), rng);
    auto [c, o] = crypto::commit(bits, rng);
    CHECK(crypto::open(c, o) == bits);
    auto tampered = o;
    tampered.bits = bits.flipped(rng.below(bits.size()));
    CHECK_FALSE(crypto::opens(c, tampered));
    CHECK(code_of([&] { crypto::open(c, tampered); }) == ErrorCode::OpeningMismatch);
  }
  const auto b = BitString::parse("1011");
  CHECK(crypto::commit(b, rng).first.digest != crypto::commit(b, rng).first.digest);
}

TEST_CASE("signatures") {
  crypto::KeyRegistry reg;
  Rng rng(4);
  const auto k1 = reg.issue(NodeId{1}, rng);
  const auto k2 = reg.issue(NodeId{2}, rng);
  const auto msg = to_bytes("c1 r1 c2 r2");
  const auto sig = reg.sign(k1, msg);
  CHECK(reg.verify(k1.pub, msg, sig));
  CHECK_FALSE(reg.verify(k2.pub, msg, sig));
  CHECK_FALSE(reg.verify(k1.pub, to_bytes("c1 r2 c2 r1"), sig));
  CHECK(reg.owner_of(k2.pub) == NodeId{2});

  const auto rogue = reg.issue(NodeId{9}, rng, false);
  CHECK(code_of([&] { reg.verify(rogue.pub, msg, reg.sign(rogue, msg)); }) == ErrorCode::UnknownKey);
}

TEST_CASE("uncertified node is rejected by the protocol") {
  auto s = builders::one_way({0, 0}, {30, 40}, 3, 1);
  s.config.auth_enabled = true;
  s.nodes[1].has_cert = false;
  s.nodes[1].policy = policy::NodeInsertion{};
  CHECK(code_of([&] { proto::run_scenario(s); }) == ErrorCode::AuthFailure);
}

TEST_CASE("broadcast arrival times") {
  simkit::Simulator sim({{NodeId{1}, {0, 0}}, {NodeId{2}, {0, 299792458}}, {NodeId{3}, {0, 10}}}, kSpeedOfLight, 1);
  simkit::MessageBody body;
  sim.schedule_broadcast(NodeId{1}, body, 0.0);
  std::map<NodeId, double> seen;
  sim.run([&](simkit::Simulator &, const simkit::Emission &, const simkit::ArrivalRecord &a) { seen[a.receiver] = a.t_arrive; });
  CHECK(seen.size() == 2);
  CHECK(seen.count(NodeId{1}) == 0);
  CHECK(seen[NodeId{2}] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(seen[NodeId{3}] == doctest::Approx(10.0 / kSpeedOfLight).epsilon(1e-15));
}

TEST_CASE("causality is enforced for checked sends") {
  simkit::Simulator sim({{NodeId{1}, {0, 0}}, {NodeId{2}, {100, 0}}}, kSpeedOfLight, 1);
  sim.schedule_broadcast(NodeId{1}, {}, 1.0);
  ErrorCode code = ErrorCode::ParseError;
  bool early_ok = false;
  sim.run([&](simkit::Simulator &s, const simkit::Emission &e, const simkit::ArrivalRecord &a) {
    if (e.sender != NodeId{1}) return;
    try {
      s.schedule_broadcast(a.receiver, {}, a.t_arrive - 1e-9);
    } catch (const Error &err) {
      code = err.code();
    }
    early_ok = s.schedule_broadcast_unchecked(a.receiver, {}, a.t_arrive - 1e-9).t_send < a.t_arrive;
  });
  CHECK(code == ErrorCode::CausalityViolation);
  CHECK(early_ok);
}

TEST_CASE("run emission counts and determinism") {
  const auto ow = proto::run_scenario(builders::one_way({0, 0}, {30, 40}, 10, 3));
  CHECK(ow.trace.count_all() == 22);
  CHECK(ow.trace.count(simkit::Phase::Rapid) == 20);

  const auto ring = builders::ring({{0, 0}, {100, 0}, {100, 100}, {0, 100}}, 1, 3);
  CHECK(proto::run_scenario(ring).trace.count(simkit::Phase::Rapid) == 8);

  std::ostringstream a, b;
  simkit::write_trace_jsonl(proto::run_scenario(ring).trace, a);
  simkit::write_trace_jsonl(proto::run_scenario(ring).trace, b);
  CHECK(a.str() == b.str());
  auto other = ring;
  other.rng_seed = 4;
  std::ostringstream c;
  simkit::write_trace_jsonl(proto::run_scenario(other).trace, c);
  CHECK(a.str() != c.str());
}

TEST_CASE("honest arrivals are distance over c; clock offsets do not move bounds") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const auto pos = builders::random_positions(5, rng);
    auto s = builders::ring(pos, 2, rng.next());
    const auto r = proto::run_scenario(s);
    for (const auto &a : r.trace.arrivals) {
      const auto &e = r.trace.emission(a.seq);
      const double want = distance(s.node(e.sender).pos, s.node(a.receiver).pos) / kSpeedOfLight;
      CHECK(std::fabs(a.t_arrive - e.t_send - want) < 1e-15);
    }
    // Another seed draws other clock offsets and nonces; bounds stay put.
    auto s2 = s;
    s2.rng_seed ^= 0xABCDEF;
    const auto r2 = proto::run_scenario(s2);
    REQUIRE(r.estimates.size() == r2.estimates.size());
    for (std::size_t i = 0; i < r.estimates.size(); ++i) {
      CHECK(std::fabs(r.estimates[i].bound_m - r2.estimates[i].bound_m) < kEpsDist);
    }
  }
}
