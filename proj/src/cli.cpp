#include "dynsub/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "dynsub/adversary.hpp"
#include "dynsub/clique.hpp"
#include "dynsub/general.hpp"
#include "dynsub/oracle.hpp"
#include "dynsub/parallel.hpp"
#include "dynsub/schedule_gen.hpp"

namespace dynsub {

namespace {

int div_ceil(int a, int b) { return (a + b - 1) / b; }

bool is_k3(const Graph& h) { return h.node_count() == 3 && is_clique(h); }

using Factory = std::function<std::unique_ptr<Protocol>(const ExperimentConfig&, const Graph&, int)>;

const std::map<std::string, Factory>& registry() {
  static const std::map<std::string, Factory> reg = [] {
    std::map<std::string, Factory> m;
    auto k3 = [](const Graph& h, const std::string& who) {
      if (!is_k3(h)) throw ConfigError(who + " lists triangles; use --h K3");
    };
    m["memlist_k3_edge_ins"] = [k3](const ExperimentConfig& c, const Graph& h, int n) {
      k3(h, "memlist_k3_edge_ins");
      return memlist_k3_edge_ins(n, c.delta);
    };
    m["list_k3_mixed_ins"] = [k3](const ExperimentConfig& c, const Graph& h, int n) {
      k3(h, "list_k3_mixed_ins");
      return list_k3_mixed_ins(n, c.delta);
    };
    m["baseline_memdetect_k3"] = [k3](const ExperimentConfig& c, const Graph& h, int n) {
      k3(h, "baseline_memdetect_k3");
      return baseline_memdetect_k3(n, c.delta, memlist_k3_params(n, c.delta).d);
    };
    m["memlist_multipartite"] = [](const ExperimentConfig& c, const Graph& h, int n) {
      return memlist_multipartite(h, n, c.r);
    };
    m["memlist_general"] = [](const ExperimentConfig& c, const Graph& h, int n) { return memlist_general(h, n, c.r); };
    m["memlist_edge_del"] = [](const ExperimentConfig& c, const Graph& h, int n) { return memlist_edge_del(h, n, c.r); };
    m["memlist_node_del"] = [](const ExperimentConfig& c, const Graph& h, int n) { return memlist_node_del(h, n, c.r); };
    m["memdetect_star"] = [](const ExperimentConfig&, const Graph& h, int) { return memdetect_star(h); };
    m["memdetect_rad1_node_del"] = [](const ExperimentConfig&, const Graph& h, int) {
      return memdetect_rad1_node_del(h);
    };
    m["memdetect_multipartite_node_del"] = [](const ExperimentConfig&, const Graph& h, int) {
      return memdetect_multipartite_node_del(h);
    };
    m["list_star_edge_del"] = [](const ExperimentConfig&, const Graph& h, int) {
      return list_star_del(h, ChangeType::EdgeDel);
    };
    m["list_star_node_del"] = [](const ExperimentConfig&, const Graph& h, int) {
      return list_star_del(h, ChangeType::NodeDel);
    };
    m["list_rad1_edge_del"] = [](const ExperimentConfig&, const Graph& h, int) { return list_rad1_edge_del(h); };
    m["list_center_edge_del"] = [](const ExperimentConfig&, const Graph& h, int n) {
      return list_center_del(h, n, ChangeType::EdgeDel);
    };
    m["list_center_node_del"] = [](const ExperimentConfig&, const Graph& h, int n) {
      return list_center_del(h, n, ChangeType::NodeDel);
    };
    m["silence"] = [](const ExperimentConfig&, const Graph& h, int) { return silence_protocol(h, Problem::MemList); };
    m["constant"] = [](const ExperimentConfig&, const Graph&, int) { return constant_protocol(Problem::MemDetect); };
    m["neighbor_id"] = [](const ExperimentConfig& c, const Graph& h, int n) {
      if (!is_k3(h)) throw ConfigError("neighbor_id detects triangles; use --h K3");
      return neighbor_id_protocol(c.width.value_or(id_width(n)));
    };
    return m;
  }();
  return reg;
}

Graph widen(const Graph& g, int n) {
  if (g.id_range() >= n) return g;
  Graph out = Graph::with_absent(n);
  for (NodeId v : g.nodes()) out.add_node(v);
  for (auto [a, b] : g.edges()) out.add_edge(a, b);
  return out;
}

nlohmann::json model_json(const ChangeModel& m) {
  nlohmann::json a = nlohmann::json::array();
  for (auto c : m) a.push_back(change_name(c));
  return a;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_event(const Event& e) {
  switch (e.kind) {
    case EventKind::Quiet: return "quiet";
    case EventKind::EdgeIns: return "edge_ins " + std::to_string(e.u) + " " + std::to_string(e.v);
    case EventKind::EdgeDel: return "edge_del " + std::to_string(e.u) + " " + std::to_string(e.v);
    case EventKind::NodeIns: return "node_ins " + std::to_string(e.v);
    case EventKind::NodeDel: return "node_del " + std::to_string(e.v);
  }
  return "?";
}

ChangeType parse_change(const std::string& s) {
  try {
    return change_from_name(s);
  } catch (const std::exception&) {
    throw ConfigError("unknown change type '" + s + "' (edge_ins, edge_del, node_ins, node_del)");
  }
}

nlohmann::json schedule_summary(const Schedule& s) {
  int changes = 0;
  for (const auto& e : s.events) changes += !e.is_quiet();
  nlohmann::json j{{"n", s.n()},
                   {"r", s.r},
                   {"rounds", s.events.size()},
                   {"changes", changes},
                   {"model", model_json(s.model)},
                   {"initial_nodes", s.initial.node_count()},
                   {"initial_edges", s.initial.edge_count()}};
  if (s.delta) j["delta"] = *s.delta;
  return j;
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j{{"command", command}, {"h", h},     {"protocol", protocol}, {"n", n},
                   {"delta", delta},     {"r", r},     {"seed", seed},         {"events", events},
                   {"mix", mix},         {"schedule", schedule}};
  if (bcap) j["bcap"] = *bcap;
  j["generator"] = {{"n0", n0},
                    {"hot", hot},
                    {"initial_edges", initial_edges},
                    {"max_gap", max_gap},
                    {"close_bias", fixed(close_bias, 6)},
                    {"initial", initial},
                    {"tail", tail}};
  if (command == "sweep") j["sweep"] = {{"n_list", n_list}, {"repeats", repeats}};
  if (command == "attack") {
    j["attack"] = {{"kind", attack}, {"s", s}, {"t", t}, {"T", T}, {"change", change}, {"max_b", max_b}};
    if (width) j["attack"]["width"] = *width;
  }
  if (command == "audit") j["lb"] = lb;
  return j;
}

std::vector<std::string> protocol_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::unique_ptr<Protocol> make_protocol(const ExperimentConfig& cfg, const std::string& name, const Graph& h, int n) {
  auto it = registry().find(name);
  if (it == registry().end()) {
    std::string all;
    for (const auto& k : protocol_names()) all += (all.empty() ? "" : ", ") + k;
    throw ConfigError("unknown protocol '" + name + "'; choose one of: " + all);
  }
  try {
    return it->second(cfg, h, n);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::optional<int> protocol_bound(const std::string& name, const Graph& h, int n, int delta, int r) {
  GraphParams P = params(h);
  int L = id_width(n);
  if (name == "memlist_k3_edge_ins") return memlist_k3_bound(n, delta);
  if (name == "list_k3_mixed_ins") return list_k3_bound(n, delta);
  if (name == "memlist_multipartite") return div_ceil(view_payload_bits(n, 1, true), r);
  if (name == "memlist_general") return div_ceil(view_payload_bits(n, P.r_H, false), r / P.r_H);
  if (name == "memlist_edge_del") {
    int F = std::max(1, r / P.r_H);
    return div_ceil(2 * L, F) + flood_header_bits(P.r_H, r);
  }
  if (name == "memlist_node_del") {
    if (P.r_H_prime == 0) return 0;
    int F = std::max(1, r / P.r_H_prime);
    return div_ceil(L, F) + flood_header_bits(P.r_H_prime, r);
  }
  if (name == "memdetect_multipartite_node_del") return 1;
  if (name == "list_star_edge_del" || name == "list_star_node_del" || name == "silence") return 0;
  if (name == "list_rad1_edge_del" || name == "constant") return 1;
  if (name == "list_center_edge_del") return 2 * L;
  if (name == "list_center_node_del") return L;
  return std::nullopt;
}

Graph parse_target(const std::string& spec) {
  Graph h;
  try {
    h = parse_graph_spec(spec);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (h.node_count() < 2 || !is_connected(h)) throw ConfigError("target '" + spec + "' must be connected with 2+ nodes");
  return h;
}

// ---------------------------------------------------------------------------
// Regime table

nlohmann::json regime_rows(const Graph& h) {
  GraphParams P = params(h);
  const bool clique = P.is_clique, star = P.is_star, multi = P.is_complete_multipartite, k3 = is_k3(h);
  nlohmann::json rows = nlohmann::json::array();
  auto row = [&](const std::string& problem, const std::string& change, const std::string& regime,
                 const std::string& cell, const std::string& protocol, const std::string& note = "") {
    nlohmann::json r{{"problem", problem}, {"change", change}, {"regime", regime}, {"cell", cell}};
    r["protocol"] = protocol.empty() ? nlohmann::json(nullptr) : nlohmann::json(protocol);
    if (!note.empty()) r["note"] = note;
    rows.push_back(r);
  };
  const std::string below_rH = "r < r_H = " + std::to_string(P.r_H) + " is impossible";
  const std::string below_rHp = "r < r_H' = " + std::to_string(P.r_H_prime) + " is impossible";

  // Membership listing.
  if (clique)
    row("MemList", "edge_ins", "clique", "r=1: Θ(√n); r≥2: Θ(1)", k3 ? "memlist_k3_edge_ins" : "memlist_multipartite");
  else if (multi)
    row("MemList", "edge_ins", "complete multipartite (r_H=1)", "Θ(n/r)", "memlist_multipartite");
  else
    row("MemList", "edge_ins", "r_H=" + std::to_string(P.r_H) + "≥2", "Θ(n²/r)", "memlist_general", below_rH);
  if (multi)
    row("MemList", "node_ins", clique ? "clique" : "complete multipartite", "Θ(n/r)", "memlist_multipartite");
  else
    row("MemList", "node_ins", "not complete multipartite", "Θ(n²/r)", "memlist_general", below_rH);
  if (clique)
    row("MemList", "edge_del", "clique", "Θ(1)", "memlist_edge_del", "shipped flood costs O(log n)");
  else
    row("MemList", "edge_del", "not a clique", "Θ((log n)/r)", "memlist_edge_del", P.r_H > 1 ? below_rH : "");
  if (clique)
    row("MemList", "node_del", "clique", "0", "memlist_node_del");
  else
    row("MemList", "node_del", "not a clique", "Θ((log n)/r)", "memlist_node_del", P.r_H_prime > 1 ? below_rHp : "");

  // Membership detection, one round.
  if (star) {
    for (auto c : {"edge_ins", "node_ins", "edge_del"}) row("MemDetect", c, "star", "Θ(1)", "memdetect_star");
  }
  if (!star) {
    if (k3)
      row("MemDetect", "edge_ins", "triangle", "O(log n), Ω(log log n)", "baseline_memdetect_k3");
    else if (clique)
      row("MemDetect", "edge_ins", "clique s≥4", "O(√n), Ω(log log n)", "");
    else if (multi)
      row("MemDetect", "edge_ins", "complete multipartite", "Θ(n)", "memlist_multipartite");
    else
      row("MemDetect", "edge_ins", "not complete multipartite", "Impossible", "");
    if (multi)
      row("MemDetect", "node_ins", clique ? "clique" : "complete multipartite", "Θ(n)", "memlist_multipartite");
    else
      row("MemDetect", "node_ins", "not complete multipartite", "Impossible", "");
    if (clique)
      row("MemDetect", "edge_del", "clique", "Θ(1)", "");
    else if (multi)
      row("MemDetect", "edge_del", "complete multipartite", "O(log n)", "memlist_edge_del");
    else
      row("MemDetect", "edge_del", "not complete multipartite", "Impossible", "");
  }
  if (P.diam == 1)
    row("MemDetect", "node_del", "diam=1", "0", "memlist_node_del");
  else if (P.diam >= 3)
    row("MemDetect", "node_del", "diam≥3", "Impossible", "");
  else if (P.rad == 1)
    row("MemDetect", "node_del", "diam=2, rad=1", "Θ(1)", "memdetect_rad1_node_del");
  else if (P.ne_diam == 2)
    row("MemDetect", "node_del", "rad=2, ne_diam=2", "Θ(1)", "memdetect_multipartite_node_del");
  else
    row("MemDetect", "node_del", "diam=2, ne_diam=3", "O(log n)", "memlist_node_del");

  // Listing, one round.
  if (P.ne_rad == 1)
    row("List", "edge_del", "ne_rad=1", "0", "list_star_edge_del");
  else if (P.ne_rad == 2 && P.rad == 1)
    row("List", "edge_del", "ne_rad=2, rad=1", "Θ(1)", "list_rad1_edge_del");
  else if (P.ne_rad == 2)
    row("List", "edge_del", "ne_rad=2, rad=2", "Θ(log n)", "list_center_edge_del");
  else
    row("List", "edge_del", "ne_rad=" + std::to_string(P.ne_rad) + "≥3", "Impossible", "");
  if (P.rad == 1)
    row("List", "node_del", "rad=1", "0", "list_star_node_del");
  else if (P.rad == 2 && P.diam == 2)
    row("List", "node_del", "rad=2, diam=2", "O(log n)", "list_center_node_del");
  else if (P.rad == 2)
    row("List", "node_del", "rad=2, diam≥3", "Θ(log n)", "list_center_node_del");
  else
    row("List", "node_del", "rad=" + std::to_string(P.rad) + "≥3", "Impossible", "");
  return rows;
}

// ---------------------------------------------------------------------------
// Schedules

Schedule build_schedule(const ExperimentConfig& cfg, const Graph& h, const ChangeModel& supported) {
  Schedule s;
  if (!cfg.schedule.empty()) {
    std::ifstream in(cfg.schedule);
    if (!in) throw ConfigError("cannot read schedule file " + cfg.schedule);
    try {
      s = schedule_from_json(nlohmann::json::parse(in));
    } catch (const std::exception& e) {
      throw ConfigError("bad schedule file " + cfg.schedule + ": " + e.what());
    }
  } else {
    GenConfig g;
    g.n = cfg.n;
    g.delta = cfg.delta;
    g.r = cfg.r;
    g.events = cfg.events;
    g.seed = cfg.seed;
    g.hot = cfg.hot;
    g.max_gap = cfg.max_gap;
    g.close_bias = cfg.close_bias;
    g.initial_edges = cfg.initial_edges;
    if (cfg.mix.empty()) {
      g.mix.clear();
      for (auto c : supported) g.mix[c] = 1.0;
    } else {
      try {
        g.mix = parse_mix(cfg.mix);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("bad --mix: ") + e.what());
      }
    }
    bool inserts = g.mix.count(ChangeType::EdgeIns) || g.mix.count(ChangeType::NodeIns);
    g.n0 = cfg.n0 >= 0 ? cfg.n0 : (g.mix.count(ChangeType::NodeIns) ? cfg.n / 2 : cfg.n);
    std::optional<Graph> init;
    std::string how = cfg.initial;
    if (how.empty() && !inserts) how = "blowup:" + std::to_string(std::max(1, cfg.n / h.node_count()));
    if (how.rfind("blowup:", 0) == 0) {
      int k = std::stoi(how.substr(7));
      if (k < 1) throw ConfigError("blowup size must be positive");
      Graph b = blow_up(h, std::vector<int>(h.id_range(), k));
      g.n = std::max(cfg.n, b.id_range());
      init = widen(b, g.n);
    } else if (how == "empty") {
      init = Graph::with_absent(cfg.n);
    } else if (!how.empty()) {
      init = widen(parse_target(how), cfg.n);
      g.n = init->id_range();
    }
    if (init) g.delta = std::max(g.delta, init->max_degree());
    if (g.n < 3) throw ConfigError("--n must be at least 3");
    s = random_schedule(g, init);
  }
  auto bad = validate(s);
  if (!bad.empty()) {
    std::string msg = "invalid schedule:";
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 5); ++k)
      msg += " [" + std::to_string(bad[k].index) + "] " + bad[k].message + ";";
    throw ConfigError(msg);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Commands

CmdResult cmd_params(const ExperimentConfig& cfg) {
  Graph h = parse_target(cfg.h);
  CmdResult res;
  res.json = {{"h", cfg.h}, {"graph", to_json(h)}, {"params", params_to_json(params(h))}, {"regimes", regime_rows(h)}};
  std::ostringstream csv;
  csv << "problem,change,regime,cell,protocol\n";
  for (const auto& r : res.json["regimes"])
    csv << r["problem"].get<std::string>() << "," << r["change"].get<std::string>() << ",\""
        << r["regime"].get<std::string>() << "\",\"" << r["cell"].get<std::string>() << "\","
        << (r["protocol"].is_null() ? "" : r["protocol"].get<std::string>()) << "\n";
  res.csv = csv.str();
  return res;
}

namespace {

struct Prepared {
  Graph h;
  Schedule schedule;
  std::unique_ptr<Protocol> protocol;
};

Prepared prepare(const ExperimentConfig& cfg) {
  if (cfg.protocol.empty()) throw ConfigError("--protocol is required");
  if (cfg.r < 1) throw ConfigError("--r must be positive");
  if (cfg.delta < 1) throw ConfigError("--delta must be positive");
  Prepared p;
  p.h = parse_target(cfg.h);
  auto probe = make_protocol(cfg, cfg.protocol, p.h, std::max(cfg.n, 3));
  p.schedule = build_schedule(cfg, p.h, probe->supports());
  p.protocol = make_protocol(cfg, cfg.protocol, p.h, p.schedule.n());
  auto sup = p.protocol->supports();
  for (auto c : p.schedule.model)
    if (!sup.count(c))
      throw ConfigError(cfg.protocol + " does not handle " + change_name(c) + "; it supports " +
                        model_json(sup).dump());
  if (p.schedule.r < cfg.r && cfg.schedule.empty()) throw ConfigError("schedule spacing below --r");
  return p;
}

}  // namespace

CmdResult cmd_run(const ExperimentConfig& cfg) {
  Prepared p = prepare(cfg);
  if (!cfg.save_schedule.empty()) {
    std::ofstream out(cfg.save_schedule);
    if (!out) throw ConfigError("cannot write " + cfg.save_schedule);
    out << dump(to_json(p.schedule));
  }
  RunOptions o;
  o.bandwidth_cap = cfg.bcap;
  o.tail_rounds = cfg.tail;
  auto rep = run(*p.protocol, p.h, p.schedule, o);

  CmdResult res;
  res.code = rep.verdict.pass ? 0 : 1;
  res.json = {{"config", cfg.to_json()}, {"schedule", schedule_summary(p.schedule)}, {"report", to_json(rep)}};
  if (auto b = protocol_bound(cfg.protocol, p.h, p.schedule.n(), p.schedule.delta.value_or(cfg.delta), p.schedule.r))
    res.json["bound"] = *b;
  std::ostringstream csv;
  csv << "round,event,graded,max_bits,failure\n";
  for (const auto& rec : rep.rounds)
    csv << rec.round << "," << csv_event(rec.event) << "," << (rec.graded ? 1 : 0) << "," << rec.max_bits << ","
        << (!rep.verdict.pass && rep.verdict.round == rec.round ? rep.verdict.kind : "") << "\n";
  res.csv = csv.str();
  return res;
}

CmdResult cmd_sweep(const ExperimentConfig& cfg) {
  if (cfg.protocol.empty()) throw ConfigError("--protocol is required");
  if (cfg.repeats < 1) throw ConfigError("--repeats must be positive");
  std::vector<int> ns = cfg.n_list;
  if (ns.empty())
    for (int k = 4; k <= 16; ++k) ns.push_back(1 << k);
  Graph h = parse_target(cfg.h);
  // Fail fast on a bad protocol name before spawning work.
  make_protocol(cfg, cfg.protocol, h, std::max(ns.front(), 3));

  struct Job {
    int n;
    std::uint64_t seed;
    int max_bits = 0;
    bool pass = false;
    int rounds = 0;
    std::string failure;
  };
  std::vector<Job> jobs;
  for (int n : ns)
    for (int k = 0; k < cfg.repeats; ++k) {
      Job j;
      j.n = n;
      j.seed = cfg.seed + static_cast<std::uint64_t>(k);
      jobs.push_back(j);
    }
  parallel_for(static_cast<int>(jobs.size()), cfg.workers, [&](int k) {
    Job& j = jobs[k];
    ExperimentConfig c = cfg;
    c.n = j.n;
    c.seed = j.seed;
    c.schedule.clear();
    if (c.hot == 0) c.hot = std::min(j.n, 64);
    Prepared p = prepare(c);
    RunOptions o;
    o.bandwidth_cap = cfg.bcap;
    o.keep_rounds = false;
    o.keep_outputs = false;
    auto rep = run(*p.protocol, p.h, p.schedule, o);
    j.max_bits = rep.max_bits;
    j.pass = rep.verdict.pass;
    j.rounds = rep.rounds_run;
    if (!j.pass) j.failure = rep.verdict.kind;
  });

  CmdResult res;
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "n,runs,passes,max_bits,bound,loglog,ratio\n";
  bool all = true;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    int n = ns[i];
    nlohmann::json runs = nlohmann::json::array();
    int mx = 0, passes = 0;
    for (int k = 0; k < cfg.repeats; ++k) {
      const Job& j = jobs[i * cfg.repeats + k];
      nlohmann::json rj{{"seed", j.seed}, {"max_bits", j.max_bits}, {"pass", j.pass}, {"rounds", j.rounds}};
      if (!j.pass) rj["failure"] = j.failure;
      runs.push_back(rj);
      mx = std::max(mx, j.max_bits);
      passes += j.pass;
    }
    all = all && passes == cfg.repeats;
    int loglog = std::max(1, ceil_log2(static_cast<std::uint64_t>(std::max(2, ceil_log2(static_cast<std::uint64_t>(n))))));
    std::string ratio = fixed(static_cast<double>(mx) / loglog, 4);
    auto bound = protocol_bound(cfg.protocol, h, n, cfg.delta, cfg.r);
    nlohmann::json row{{"n", n},        {"runs", runs},       {"passes", passes}, {"max_bits", mx},
                       {"loglog", loglog}, {"ratio", ratio}};
    row["bound"] = bound ? nlohmann::json(*bound) : nlohmann::json(nullptr);
    rows.push_back(row);
    csv << n << "," << cfg.repeats << "," << passes << "," << mx << "," << (bound ? std::to_string(*bound) : "") << ","
        << loglog << "," << ratio << "\n";
  }
  res.code = all ? 0 : 1;
  res.json = {{"config", cfg.to_json()}, {"rows", rows}};
  res.csv = csv.str();
  return res;
}

CmdResult cmd_attack(const ExperimentConfig& cfg) {
  CmdResult res;
  nlohmann::json j{{"config", cfg.to_json()}};
  AttackOptions opt;
  opt.workers = cfg.workers;
  opt.max_b = cfg.max_b;
  if (cfg.attack == "memdetect_clique" || cfg.attack == "detect_clique_mixed") {
    if (cfg.protocol.empty()) throw ConfigError("--protocol is required");
    if (!cfg.bcap) throw ConfigError("--bcap is required for clique attacks");
    bool mixed = cfg.attack == "detect_clique_mixed";
    int t = cfg.t > 0 ? cfg.t : (mixed ? 2 : 3);
    Graph h = complete_graph(cfg.s);
    ExperimentConfig c = cfg;
    auto p = make_protocol(c, cfg.protocol, h, cfg.n);
    AttackReport rep;
    try {
      rep = mixed ? attack_detect_clique_mixed(*p, cfg.s, *cfg.bcap, t, cfg.n, opt)
                  : attack_memdetect_clique(*p, cfg.s, *cfg.bcap, t, cfg.n, opt);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    j["attack"] = rep.to_json();
    res.code = rep.result == "violation" ? 1 : 0;
  } else if (cfg.attack == "locality" || cfg.attack == "far_deletion") {
    Graph h = parse_target(cfg.h);
    if (cfg.change.empty()) throw ConfigError("--change is required");
    ChangeType ch = parse_change(cfg.change);
    auto p = make_protocol(cfg, cfg.protocol.empty() ? "silence" : cfg.protocol, h, std::max(cfg.n, h.id_range()));
    ScenarioPair pair;
    try {
      pair = cfg.attack == "locality" ? locality_pair(h, ch, cfg.T) : far_deletion_pair(h, *p, ch);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    auto v = assert_indistinguishable(pair, *p, h);
    j["pair"] = {{"label", pair.label},
                 {"witness", pair.witness},
                 {"graded_round", pair.graded_round},
                 {"problem", problem_name(pair.problem)},
                 {"a", to_json(pair.a)},
                 {"b", to_json(pair.b)},
                 {"truth_a", to_json(pair.truth_a)},
                 {"truth_b", to_json(pair.truth_b)}};
    j["verdict"] = v.to_json();
    res.code = v.result == "violation" ? 1 : 0;
  } else {
    throw ConfigError("--attack must be memdetect_clique, detect_clique_mixed, locality or far_deletion");
  }
  res.json = j;
  return res;
}

CmdResult cmd_audit(const ExperimentConfig& cfg) {
  static const std::map<std::string, std::string> default_h{
      {"edge_ins_nonclique", "C4"},       {"node_ins_nonclique", "C4"},      {"edge_ins_nonmultipartite", "paw"},
      {"node_ins_nonmultipartite", "paw"}, {"edge_del", "C4"},               {"node_del", "C4"},
      {"memdetect_edge_ins", "K_{2,3}"},   {"memdetect_node_ins", "K_{2,3}"}};
  auto it = default_h.find(cfg.lb);
  if (it == default_h.end()) {
    std::string all;
    for (const auto& [k, v] : default_h) all += (all.empty() ? "" : ", ") + k;
    throw ConfigError("--lb must be one of: " + all);
  }
  // Every instance rejects cliques, so the K3 default means "use the usual target".
  Graph h = parse_target(cfg.h.empty() || cfg.h == "K3" ? it->second : cfg.h);
  const int n = cfg.n;
  if (n < 2 || n > 4096) throw ConfigError("--n must be in [2, 4096] for audits");
  LbInstance inst;
  long long x_formula = -1;
  try {
    if (cfg.lb.find("nonclique") != std::string::npos || cfg.lb.find("nonmultipartite") != std::string::npos) {
      bool pairs = cfg.lb.find("nonmultipartite") != std::string::npos;
      long long universe = pairs ? static_cast<long long>(n) * n : n;
      std::vector<int> choice;
      for (long long k = 0; k < universe / 2; ++k) choice.push_back(static_cast<int>(2 * k));
      inst = memlist_lb_instance(h, n, cfg.lb, choice, cfg.r);
      int dv = h.degree(inst.roles["v"].get<int>());
      x_formula = cfg.lb.rfind("edge", 0) == 0 ? staggered_slots(dv, cfg.r) : static_cast<long long>(dv) * cfg.r;
    } else if (cfg.lb == "edge_del" || cfg.lb == "node_del") {
      inst = memlist_del_lb_instance(h, n, 0, cfg.lb == "edge_del" ? ChangeType::EdgeDel : ChangeType::NodeDel, cfg.r);
      x_formula = static_cast<long long>(h.degree(inst.roles["v"].get<int>())) * cfg.r;
    } else {
      if (cfg.r != 1) throw ConfigError("memdetect audits are one-round (r = 1)");
      std::vector<int> chosen;
      for (int k = 0; k < n / 2; ++k) chosen.push_back(2 * k);
      inst = memdetect_lb_instance(h, n, chosen, 0,
                                   cfg.lb == "memdetect_edge_ins" ? ChangeType::EdgeIns : ChangeType::NodeIns);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  int B = cfg.bcap.value_or(min_bandwidth(inst.choice_count, inst.receive_slots));
  auto audit = capacity_audit(inst.choice_count, inst.receive_slots, B);

  // The instance must really demand what it claims at the graded round.
  Graph at = graph_after(inst.schedule, static_cast<std::size_t>(inst.graded_round));
  CopySet has = copies_containing(at, h, inst.witness);
  bool required_ok = std::includes(has.begin(), has.end(), inst.required.begin(), inst.required.end());
  bool expected_ok = !inst.expected || *inst.expected == !has.empty();

  CmdResult res;
  res.json = {{"config", cfg.to_json()},
              {"h", to_json(h)},
              {"roles", inst.roles},
              {"schedule", schedule_summary(inst.schedule)},
              {"witness", inst.witness},
              {"graded_round", inst.graded_round},
              {"required_copies", inst.required.size()},
              {"instance_valid", validate(inst.schedule).empty() && required_ok && expected_ok},
              {"audit", audit.to_json()},
              {"min_bandwidth", min_bandwidth(inst.choice_count, inst.receive_slots)}};
  if (x_formula >= 0) res.json["x_formula"] = x_formula;
  if (inst.expected) res.json["expected"] = *inst.expected;
  res.code = audit.satisfied && res.json["instance_valid"].get<bool>() ? 0 : 1;
  return res;
}

CmdResult dispatch(const ExperimentConfig& cfg) {
  if (cfg.command == "params") return cmd_params(cfg);
  if (cfg.command == "run") return cmd_run(cfg);
  if (cfg.command == "sweep") return cmd_sweep(cfg);
  if (cfg.command == "attack") return cmd_attack(cfg);
  if (cfg.command == "audit") return cmd_audit(cfg);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_result(const CmdResult& res, const std::string& out) {
  if (out.empty()) {
    std::cout << dump(res.json);
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + out);
  f << dump(res.json);
  if (res.csv.empty()) return;
  std::string base = out;
  if (auto dot = base.rfind('.'); dot != std::string::npos && base.find('/', dot) == std::string::npos)
    base.erase(dot);
  std::ofstream c(base + ".csv", std::ios::binary);
  if (!c) throw ConfigError("cannot write " + base + ".csv");
  c << res.csv;
}

}  // namespace dynsub
