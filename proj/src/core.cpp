#include "gdb/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace gdb {

double distance(Position a, Position b) { return std::hypot(b.x - a.x, b.y - a.y); }

std::string_view policy_name(const AdversaryPolicy &p) {
  struct Visitor {
    std::string_view operator()(const policy::Honest &) const { return "Honest"; }
    std::string_view operator()(const policy::GuessAhead &) const { return "GuessAhead"; }
    std::string_view operator()(const policy::SelectiveDelay &) const { return "SelectiveDelay"; }
    std::string_view operator()(const policy::Relay &) const { return "Relay"; }
    std::string_view operator()(const policy::FakeLocationReport &) const { return "FakeLocationReport"; }
    std::string_view operator()(const policy::EarlyChallenge &) const { return "EarlyChallenge"; }
    std::string_view operator()(const policy::NodeInsertion &) const { return "NodeInsertion"; }
  };
  return std::visit(Visitor{}, p);
}

std::string_view to_string(Role r) {
  switch (r) {
  case Role::Prover: return "Prover";
  case Role::ActiveVerifier: return "ActiveVerifier";
  case Role::PassiveVerifier: return "PassiveVerifier";
  case Role::Peer: return "Peer";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view s) {
  for (Role r : {Role::Prover, Role::ActiveVerifier, Role::PassiveVerifier, Role::Peer}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

namespace {
constexpr ProtocolKind kAllProtocols[] = {
    ProtocolKind::OneWayDB,     ProtocolKind::MutualInterleaved, ProtocolKind::OneToMany,
    ProtocolKind::MultiPartyRing, ProtocolKind::MPNV,            ProtocolKind::NtoMPassive,
    ProtocolKind::NtoMMultiParty, ProtocolKind::NtoMOneToMany,
};
} // namespace

std::string_view to_string(ProtocolKind p) {
  switch (p) {
  case ProtocolKind::OneWayDB: return "OneWayDB";
  case ProtocolKind::MutualInterleaved: return "MutualInterleaved";
  case ProtocolKind::OneToMany: return "OneToMany";
  case ProtocolKind::MultiPartyRing: return "MultiPartyRing";
  case ProtocolKind::MPNV: return "MPNV";
  case ProtocolKind::NtoMPassive: return "NtoM-passive";
  case ProtocolKind::NtoMMultiParty: return "NtoM-multiparty";
  case ProtocolKind::NtoMOneToMany: return "NtoM-onetomany";
  }
  return "?";
}

std::optional<ProtocolKind> parse_protocol(std::string_view s) {
  for (ProtocolKind p : kAllProtocols) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

const NodeSpec &Scenario::node(NodeId id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const NodeSpec &n) { return n.id == id; });
  if (it == nodes.end()) {
    throw Error(ErrorCode::MissingField, "node " + std::to_string(id.value) + " not in scenario");
  }
  return *it;
}

std::vector<NodeId> Scenario::ids_with_role(Role r) const {
  std::vector<NodeId> out;
  for (const auto &n : nodes) {
    if (n.role == r) out.push_back(n.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> Scenario::group(int g) const {
  std::vector<NodeId> out;
  for (const auto &n : nodes) {
    if (n.group == g) out.push_back(n.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint32_t active_count(double fraction, std::size_t verifiers) {
  auto k = static_cast<std::uint32_t>(std::llround(fraction * static_cast<double>(verifiers)));
  k = std::max<std::uint32_t>(k, 1);
  return std::min<std::uint32_t>(k, static_cast<std::uint32_t>(verifiers));
}

namespace {

class Checker {
public:
  void add(ErrorCode code, std::string field, std::string message) {
    out.push_back({code, std::move(field), std::move(message)});
  }

  void fraction(const std::optional<double> &v, const char *field) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) {
      add(ErrorCode::ParamOutOfRange, field, std::string(field) + " must lie in [0, 1]");
    }
  }

  void rounds(const std::optional<std::uint32_t> &v, std::uint32_t n, const char *field) {
    if (v && *v > n) {
      add(ErrorCode::ParamOutOfRange, field, std::string(field) + " must not exceed config.n");
    }
  }

  std::vector<Violation> out;
};

bool one_way_family(ProtocolKind p) { return p == ProtocolKind::OneWayDB || p == ProtocolKind::MPNV; }

bool ntom(ProtocolKind p) {
  return p == ProtocolKind::NtoMPassive || p == ProtocolKind::NtoMMultiParty ||
         p == ProtocolKind::NtoMOneToMany;
}

void check_policy(Checker &chk, const Scenario &s, const NodeSpec &n) {
  const std::string field = "nodes[" + std::to_string(n.id.value) + "].policy";
  const bool passive_family = one_way_family(s.protocol) || s.protocol == ProtocolKind::NtoMPassive;
  auto inapplicable = [&](const std::string &why) {
    chk.add(ErrorCode::PolicyInapplicable, field, std::string(policy_name(n.policy)) + " " + why);
  };

  if (const auto *g = std::get_if<policy::GuessAhead>(&n.policy)) {
    const bool prover_like = n.role == Role::Prover || (s.protocol == ProtocolKind::NtoMPassive && n.role == Role::Peer);
    if (!passive_family || !prover_like) inapplicable("requires a prover in a one-way protocol");
    if (g->advance_s && *g->advance_s < 0) chk.add(ErrorCode::ParamOutOfRange, field + ".advance_s", "advance_s must be >= 0");
  } else if (const auto *d = std::get_if<policy::SelectiveDelay>(&n.policy)) {
    if (is_verifier(n.role)) inapplicable("applies to provers and peers only");
    bool bad = d->all_s < 0;
    for (auto &[_, v] : d->per_message) bad |= v < 0;
    for (auto &[_, v] : d->per_target) bad |= v < 0;
    for (auto &[m, _] : d->per_message) {
      if (m == 0) chk.add(ErrorCode::ParamOutOfRange, field + ".per_message", "message numbers are 1-based");
    }
    if (bad) chk.add(ErrorCode::ParamOutOfRange, field, "delays must be >= 0");
  } else if (const auto *r = std::get_if<policy::Relay>(&n.policy)) {
    if (s.protocol != ProtocolKind::OneWayDB || n.role != Role::Prover) {
      inapplicable("requires a Prover node in OneWayDB");
    }
    auto it = std::find_if(s.nodes.begin(), s.nodes.end(), [&](const NodeSpec &m) { return m.id == r->victim; });
    if (it == s.nodes.end() || it->role != Role::Prover || it->id == n.id) {
      chk.add(ErrorCode::RoleMismatch, field + ".victim", "relay victim must be another Prover");
    }
  } else if (const auto *e = std::get_if<policy::EarlyChallenge>(&n.policy)) {
    const bool verifier_like = is_verifier(n.role) || (s.protocol == ProtocolKind::NtoMPassive && n.role == Role::Peer);
    if (!passive_family || !verifier_like) inapplicable("requires an active verifier in a one-way protocol");
    if (!(e->pr_ch >= 0 && e->pr_ch <= 1)) chk.add(ErrorCode::ParamOutOfRange, field + ".pr_ch", "pr_ch must lie in [0, 1]");
    if (!(e->advance_s >= 0)) chk.add(ErrorCode::ParamOutOfRange, field + ".advance_s", "advance_s must be >= 0");
  } else if (std::holds_alternative<policy::FakeLocationReport>(n.policy)) {
    const bool verifier_like = is_verifier(n.role) || (s.protocol == ProtocolKind::NtoMPassive && n.role == Role::Peer);
    if (!passive_family || !verifier_like) inapplicable("requires a verifier in a one-way protocol");
  } else if (std::holds_alternative<policy::NodeInsertion>(n.policy)) {
    if (n.has_cert) chk.add(ErrorCode::ParamOutOfRange, "nodes[" + std::to_string(n.id.value) + "].has_cert", "NodeInsertion nodes carry no certificate");
  }
}

} // namespace

std::vector<Violation> validate_scenario(const Scenario &s) {
  Checker chk;

  // ids and positions
  std::set<NodeId> ids;
  for (const auto &n : s.nodes) {
    if (!ids.insert(n.id).second) {
      chk.add(ErrorCode::DuplicateNodeId, "nodes[].id", "duplicate node id " + std::to_string(n.id.value));
    }
    if (!std::isfinite(n.pos.x) || !std::isfinite(n.pos.y)) {
      chk.add(ErrorCode::ParamOutOfRange, "nodes[" + std::to_string(n.id.value) + "].pos", "coordinates must be finite");
    }
  }
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < s.nodes.size(); ++j) {
      if (s.nodes[i].pos == s.nodes[j].pos) {
        chk.add(ErrorCode::ParamOutOfRange, "nodes[].pos",
                "nodes " + std::to_string(s.nodes[i].id.value) + " and " + std::to_string(s.nodes[j].id.value) +
                    " share a position");
      }
    }
  }

  // config
  const auto &cfg = s.config;
  if (cfg.n < 1) chk.add(ErrorCode::ParamOutOfRange, "config.n", "n must be >= 1");
  if (cfg.bit_len < 1) chk.add(ErrorCode::ParamOutOfRange, "config.bit_len", "bit_len must be >= 1");
  if (!(cfg.alpha >= 0) || !std::isfinite(cfg.alpha)) chk.add(ErrorCode::ParamOutOfRange, "config.alpha", "alpha must be >= 0");
  if (!(cfg.c > 0) || !std::isfinite(cfg.c)) chk.add(ErrorCode::ParamOutOfRange, "config.c", "c must be > 0");
  if (cfg.pre_post_msgs < 2) {
    chk.add(ErrorCode::ParamOutOfRange, "config.pre_post_msgs", "pre_post_msgs must be >= 2 (commit and decommit)");
  }

  // experiment
  const auto &ex = s.experiment;
  chk.fraction(ex.d_a, "experiment.d_a");
  chk.fraction(ex.d_1, "experiment.d_1");
  chk.fraction(ex.d_2, "experiment.d_2");
  chk.rounds(ex.n_a, cfg.n, "experiment.n_a");
  chk.rounds(ex.n_a1, cfg.n, "experiment.n_a1");
  chk.rounds(ex.n_a2, cfg.n, "experiment.n_a2");
  if (ex.n_p && ex.n_a && *ex.n_p + *ex.n_a != cfg.n) {
    chk.add(ErrorCode::ParamOutOfRange, "experiment.n_p", "n_p must equal config.n - n_a");
  }
  if (ex.n_p1 && ex.n_a1 && *ex.n_p1 + *ex.n_a1 != cfg.n) {
    chk.add(ErrorCode::ParamOutOfRange, "experiment.n_p1", "n_p1 must equal config.n - n_a1");
  }
  if (ex.n_p2 && ex.n_a2 && *ex.n_p2 + *ex.n_a2 != cfg.n) {
    chk.add(ErrorCode::ParamOutOfRange, "experiment.n_p2", "n_p2 must equal config.n - n_a2");
  }

  // roles vs protocol
  auto count = [&](Role r) { return s.ids_with_role(r).size(); };
  const auto peers = count(Role::Peer);
  const auto provers = count(Role::Prover);
  const auto active = count(Role::ActiveVerifier);
  const auto passive = count(Role::PassiveVerifier);
  const auto total = s.nodes.size();
  auto mismatch = [&](const std::string &msg) { chk.add(ErrorCode::RoleMismatch, "nodes[].role", msg); };

  switch (s.protocol) {
  case ProtocolKind::OneWayDB: {
    if (peers) mismatch("OneWayDB scenarios contain no Peer");
    if (active != 1) mismatch("OneWayDB needs exactly one ActiveVerifier");
    std::size_t relays = 0;
    for (const auto &n : s.nodes) relays += std::holds_alternative<policy::Relay>(n.policy);
    if (provers - relays != 1) mismatch("OneWayDB needs exactly one target Prover");
    if (relays > 1) mismatch("OneWayDB supports at most one relay");
    break;
  }
  case ProtocolKind::MutualInterleaved:
    if (peers != total || total != 2) mismatch("MutualInterleaved needs exactly two Peers");
    break;
  case ProtocolKind::OneToMany:
    if (peers != total || total < 2) mismatch("OneToMany needs an initiator and at least one participant, all Peers");
    break;
  case ProtocolKind::MultiPartyRing:
    if (peers != total) mismatch("MultiPartyRing scenarios contain only Peer nodes");
    if (total < 4) chk.add(ErrorCode::ParamOutOfRange, "nodes", "N must be >= 4 for MultiPartyRing");
    break;
  case ProtocolKind::MPNV:
    if (peers) mismatch("MPNV scenarios contain no Peer");
    if (provers < 1 || active + passive < 1) mismatch("MPNV needs at least one Prover and one verifier");
    if (ex.N && *ex.N != active + passive) chk.add(ErrorCode::ParamOutOfRange, "experiment.N", "N must equal the verifier count");
    if (ex.M && *ex.M != provers) chk.add(ErrorCode::ParamOutOfRange, "experiment.M", "M must equal the prover count");
    break;
  case ProtocolKind::NtoMPassive:
  case ProtocolKind::NtoMMultiParty:
  case ProtocolKind::NtoMOneToMany: {
    if (peers != total) mismatch("NtoM scenarios contain only Peer nodes");
    const auto g1 = s.group(1).size();
    const auto g2 = s.group(2).size();
    if (g1 + g2 != total) chk.add(ErrorCode::ParamOutOfRange, "nodes[].group", "every NtoM node needs group 1 or 2");
    if (g1 == 0 || g2 == 0) mismatch("NtoM needs two non-empty groups");
    if (ex.N && *ex.N != g1) chk.add(ErrorCode::ParamOutOfRange, "experiment.N", "N must equal the size of group 1");
    if (ex.M && *ex.M != g2) chk.add(ErrorCode::ParamOutOfRange, "experiment.M", "M must equal the size of group 2");
    if (s.protocol == ProtocolKind::NtoMMultiParty && total < 4) {
      chk.add(ErrorCode::ParamOutOfRange, "nodes", "N must be >= 4 for MultiPartyRing");
    }
    break;
  }
  }
  if (!ntom(s.protocol)) {
    for (const auto &n : s.nodes) {
      if (n.group) {
        chk.add(ErrorCode::ParamOutOfRange, "nodes[" + std::to_string(n.id.value) + "].group", "group is only meaningful for NtoM");
      }
    }
  }

  for (const auto &n : s.nodes) check_policy(chk, s, n);
  return std::move(chk.out);
}

void require_valid(const Scenario &s) {
  auto v = validate_scenario(s);
  if (!v.empty()) throw Error(v.front().code, v.front().field + ": " + v.front().message);
}

} // namespace gdb
