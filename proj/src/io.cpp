#include "gdb/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gdb/errors.hpp"

namespace gdb::io {

using nlohmann::json;

namespace {

void only_keys(const json &j, const std::string &where, std::initializer_list<const char *> allowed) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) throw Error(ErrorCode::ParseError, where + ": unknown key '" + it.key() + "'");
  }
}

const json &need(const json &j, const std::string &where, const char *key) {
  if (!j.contains(key)) throw Error(ErrorCode::MissingField, where + "." + key + " is required");
  return j.at(key);
}

template <typename T> T as(const json &j, const std::string &where) {
  try {
    return j.get<T>();
  } catch (const json::exception &) {
    throw Error(ErrorCode::ParseError, where + " has the wrong type");
  }
}

template <typename T> void opt(const json &j, const std::string &where, const char *key, std::optional<T> &out) {
  if (j.contains(key) && !j.at(key).is_null()) out = as<T>(j.at(key), where + "." + key);
}

template <typename T> void val(const json &j, const std::string &where, const char *key, T &out) {
  if (j.contains(key)) out = as<T>(j.at(key), where + "." + key);
}

Position position(const json &j, const std::string &where) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ParseError, where + " must be [x, y]");
  return Position{as<double>(j[0], where + "[0]"), as<double>(j[1], where + "[1]")};
}

std::uint32_t id_of(const json &j, const std::string &where) {
  const auto v = as<std::int64_t>(j, where);
  if (v < 0 || v > 0xFFFFFFFFLL) throw Error(ErrorCode::ParamOutOfRange, where + " must be a non-negative 32-bit id");
  return static_cast<std::uint32_t>(v);
}

AdversaryPolicy parse_policy(const json &j, const std::string &where) {
  const auto kind = as<std::string>(need(j, where, "kind"), where + ".kind");
  if (kind == "Honest") {
    only_keys(j, where, {"kind"});
    return policy::Honest{};
  }
  if (kind == "GuessAhead") {
    only_keys(j, where, {"kind", "rounds", "advance_s"});
    policy::GuessAhead g;
    opt(j, where, "rounds", g.rounds);
    opt(j, where, "advance_s", g.advance_s);
    return g;
  }
  if (kind == "SelectiveDelay") {
    only_keys(j, where, {"kind", "all_s", "per_message", "per_target"});
    policy::SelectiveDelay d;
    val(j, where, "all_s", d.all_s);
    if (j.contains("per_message")) {
      for (const auto &e : j.at("per_message")) {
        if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::ParseError, where + ".per_message entries are [number, delay]");
        d.per_message.emplace_back(id_of(e[0], where + ".per_message"), as<double>(e[1], where + ".per_message"));
      }
    }
    if (j.contains("per_target")) {
      for (const auto &e : j.at("per_target")) {
        if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::ParseError, where + ".per_target entries are [node, delay]");
        d.per_target.emplace_back(NodeId{id_of(e[0], where + ".per_target")}, as<double>(e[1], where + ".per_target"));
      }
    }
    return d;
  }
  if (kind == "Relay") {
    only_keys(j, where, {"kind", "victim"});
    return policy::Relay{NodeId{id_of(need(j, where, "victim"), where + ".victim")}};
  }
  if (kind == "FakeLocationReport") {
    only_keys(j, where, {"kind", "claimed_pos", "distance_offset_m"});
    policy::FakeLocationReport f;
    if (j.contains("claimed_pos")) f.claimed_pos = position(j.at("claimed_pos"), where + ".claimed_pos");
    val(j, where, "distance_offset_m", f.distance_offset_m);
    return f;
  }
  if (kind == "EarlyChallenge") {
    only_keys(j, where, {"kind", "advance_s", "pr_ch"});
    policy::EarlyChallenge e;
    val(j, where, "advance_s", e.advance_s);
    val(j, where, "pr_ch", e.pr_ch);
    return e;
  }
  if (kind == "NodeInsertion") {
    only_keys(j, where, {"kind"});
    return policy::NodeInsertion{};
  }
  throw Error(ErrorCode::ParseError, where + ".kind: unknown policy '" + kind + "'");
}

json policy_json(const AdversaryPolicy &p) {
  json j = {{"kind", std::string(policy_name(p))}};
  if (const auto *g = std::get_if<policy::GuessAhead>(&p)) {
    if (g->rounds) j["rounds"] = *g->rounds;
    if (g->advance_s) j["advance_s"] = *g->advance_s;
  } else if (const auto *d = std::get_if<policy::SelectiveDelay>(&p)) {
    j["all_s"] = d->all_s;
    j["per_message"] = json::array();
    for (auto &[m, v] : d->per_message) j["per_message"].push_back({m, v});
    j["per_target"] = json::array();
    for (auto &[t, v] : d->per_target) j["per_target"].push_back({t.value, v});
  } else if (const auto *r = std::get_if<policy::Relay>(&p)) {
    j["victim"] = r->victim.value;
  } else if (const auto *f = std::get_if<policy::FakeLocationReport>(&p)) {
    if (f->claimed_pos) j["claimed_pos"] = {f->claimed_pos->x, f->claimed_pos->y};
    j["distance_offset_m"] = f->distance_offset_m;
  } else if (const auto *e = std::get_if<policy::EarlyChallenge>(&p)) {
    j["advance_s"] = e->advance_s;
    j["pr_ch"] = e->pr_ch;
  }
  return j;
}

} // namespace

Scenario parse_scenario(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
  }
  only_keys(j, "scenario", {"nodes", "protocol", "config", "experiment", "rng_seed", "tolerances"});

  Scenario s;
  const auto proto_name = as<std::string>(need(j, "scenario", "protocol"), "protocol");
  const auto proto = parse_protocol(proto_name);
  if (!proto) throw Error(ErrorCode::ParseError, "protocol: unknown protocol '" + proto_name + "'");
  s.protocol = *proto;
  val(j, "scenario", "rng_seed", s.rng_seed);

  if (j.contains("config")) {
    const auto &c = j.at("config");
    only_keys(c, "config", {"n", "bit_len", "alpha", "c", "pre_post_msgs", "auth_enabled"});
    val(c, "config", "n", s.config.n);
    val(c, "config", "bit_len", s.config.bit_len);
    val(c, "config", "alpha", s.config.alpha);
    val(c, "config", "c", s.config.c);
    val(c, "config", "pre_post_msgs", s.config.pre_post_msgs);
    val(c, "config", "auth_enabled", s.config.auth_enabled);
  }
  if (j.contains("experiment")) {
    const auto &e = j.at("experiment");
    only_keys(e, "experiment", {"n_a", "n_p", "d_a", "d_1", "d_2", "n_a1", "n_a2", "n_p1", "n_p2", "N", "M"});
    auto &x = s.experiment;
    opt(e, "experiment", "n_a", x.n_a);
    opt(e, "experiment", "n_p", x.n_p);
    opt(e, "experiment", "d_a", x.d_a);
    opt(e, "experiment", "d_1", x.d_1);
    opt(e, "experiment", "d_2", x.d_2);
    opt(e, "experiment", "n_a1", x.n_a1);
    opt(e, "experiment", "n_a2", x.n_a2);
    opt(e, "experiment", "n_p1", x.n_p1);
    opt(e, "experiment", "n_p2", x.n_p2);
    opt(e, "experiment", "N", x.N);
    opt(e, "experiment", "M", x.M);
  }
  if (j.contains("tolerances")) {
    const auto &t = j.at("tolerances");
    only_keys(t, "tolerances", {"eps_t", "eps_d", "eps_detect"});
    val(t, "tolerances", "eps_t", s.tolerances.eps_t);
    val(t, "tolerances", "eps_d", s.tolerances.eps_d);
    val(t, "tolerances", "eps_detect", s.tolerances.eps_detect);
  }

  const auto &nodes = need(j, "scenario", "nodes");
  if (!nodes.is_array()) throw Error(ErrorCode::ParseError, "nodes must be an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto where = "nodes[" + std::to_string(i) + "]";
    const auto &n = nodes[i];
    only_keys(n, where, {"id", "pos", "role", "policy", "has_cert", "group"});
    NodeSpec spec;
    spec.id = NodeId{id_of(need(n, where, "id"), where + ".id")};
    spec.pos = position(need(n, where, "pos"), where + ".pos");
    if (n.contains("role")) {
      const auto r = as<std::string>(n.at("role"), where + ".role");
      const auto role = parse_role(r);
      if (!role) throw Error(ErrorCode::ParseError, where + ".role: unknown role '" + r + "'");
      spec.role = *role;
    }
    if (n.contains("policy")) spec.policy = parse_policy(n.at("policy"), where + ".policy");
    val(n, where, "has_cert", spec.has_cert);
    opt(n, where, "group", spec.group);
    s.nodes.push_back(std::move(spec));
  }
  return s;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path.string());
  out << content;
}

Scenario load_scenario(const std::filesystem::path &path) { return parse_scenario(read_file(path)); }

std::string scenario_to_json(const Scenario &s) {
  json nodes = json::array();
  for (const auto &n : s.nodes) {
    json j = {{"id", n.id.value},
              {"pos", {n.pos.x, n.pos.y}},
              {"role", std::string(to_string(n.role))},
              {"policy", policy_json(n.policy)},
              {"has_cert", n.has_cert}};
    if (n.group) j["group"] = *n.group;
    nodes.push_back(j);
  }
  json ex = json::object();
  const auto &x = s.experiment;
  auto put = [&](const char *k, const auto &v) {
    if (v) ex[k] = *v;
  };
  put("n_a", x.n_a);
  put("n_p", x.n_p);
  put("d_a", x.d_a);
  put("d_1", x.d_1);
  put("d_2", x.d_2);
  put("n_a1", x.n_a1);
  put("n_a2", x.n_a2);
  put("n_p1", x.n_p1);
  put("n_p2", x.n_p2);
  put("N", x.N);
  put("M", x.M);
  json j = {{"protocol", std::string(to_string(s.protocol))},
            {"rng_seed", s.rng_seed},
            {"config",
             {{"n", s.config.n},
              {"bit_len", s.config.bit_len},
              {"alpha", s.config.alpha},
              {"c", s.config.c},
              {"pre_post_msgs", s.config.pre_post_msgs},
              {"auth_enabled", s.config.auth_enabled}}},
            {"experiment", ex},
            {"tolerances",
             {{"eps_t", s.tolerances.eps_t}, {"eps_d", s.tolerances.eps_d}, {"eps_detect", s.tolerances.eps_detect}}},
            {"nodes", nodes}};
  return j.dump(2) + "\n";
}

} // namespace gdb::io
