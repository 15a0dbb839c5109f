#include "dynsub/sim.hpp"

#include <algorithm>
#include <sstream>

namespace dynsub {

Event Event::node_ins(NodeId x, std::vector<NodeId> ns) {
  std::sort(ns.begin(), ns.end());
  return {EventKind::NodeIns, 0, x, std::move(ns)};
}

std::string change_name(ChangeType c) {
  switch (c) {
    case ChangeType::EdgeIns: return "edge_ins";
    case ChangeType::EdgeDel: return "edge_del";
    case ChangeType::NodeIns: return "node_ins";
    case ChangeType::NodeDel: return "node_del";
  }
  return "?";
}

ChangeType change_from_name(const std::string& s) {
  for (auto c : {ChangeType::EdgeIns, ChangeType::EdgeDel, ChangeType::NodeIns, ChangeType::NodeDel})
    if (change_name(c) == s) return c;
  throw SimError("unknown change type '" + s + "'");
}

std::optional<ChangeType> change_of(EventKind k) {
  switch (k) {
    case EventKind::EdgeIns: return ChangeType::EdgeIns;
    case EventKind::EdgeDel: return ChangeType::EdgeDel;
    case EventKind::NodeIns: return ChangeType::NodeIns;
    case EventKind::NodeDel: return ChangeType::NodeDel;
    case EventKind::Quiet: break;
  }
  return std::nullopt;
}

std::string problem_name(Problem p) {
  switch (p) {
    case Problem::MemList: return "MemList";
    case Problem::MemDetect: return "MemDetect";
    case Problem::List: return "List";
    case Problem::Detect: return "Detect";
  }
  return "?";
}

Problem problem_from_name(const std::string& s) {
  for (auto p : {Problem::MemList, Problem::MemDetect, Problem::List, Problem::Detect})
    if (problem_name(p) == s) return p;
  throw SimError("unknown problem '" + s + "'");
}

namespace {

std::string check_event(const Graph& g, const Event& e) {
  auto bad_id = [&](NodeId x) { return !g.has_node(x); };
  switch (e.kind) {
    case EventKind::Quiet: return {};
    case EventKind::EdgeIns:
      if (bad_id(e.u) || bad_id(e.v)) return "edge_ins endpoint not present";
      if (e.u == e.v) return "edge_ins self-loop";
      if (g.has_edge(e.u, e.v)) return "edge_ins of an existing edge";
      return {};
    case EventKind::EdgeDel:
      if (!g.has_edge(e.u, e.v)) return "edge_del of a non-edge";
      return {};
    case EventKind::NodeIns: {
      if (e.v < 1 || e.v > g.id_range()) return "node_ins id outside the id range";
      if (g.has_node(e.v)) return "node_ins id already present";
      std::set<NodeId> seen;
      for (NodeId w : e.nbrs) {
        if (bad_id(w)) return "node_ins neighbor not present";
        if (!seen.insert(w).second) return "node_ins duplicate neighbor";
      }
      return {};
    }
    case EventKind::NodeDel:
      if (bad_id(e.v)) return "node_del of an absent node";
      return {};
  }
  return "unknown event";
}

}  // namespace

void apply_event(Graph& g, const Event& e) {
  if (auto err = check_event(g, e); !err.empty()) throw SimError(err);
  switch (e.kind) {
    case EventKind::Quiet: break;
    case EventKind::EdgeIns: g.add_edge(e.u, e.v); break;
    case EventKind::EdgeDel: g.remove_edge(e.u, e.v); break;
    case EventKind::NodeIns:
      g.add_node(e.v);
      for (NodeId w : e.nbrs) g.add_edge(e.v, w);
      break;
    case EventKind::NodeDel: g.remove_node(e.v); break;
  }
}

std::vector<Violation> validate(const Schedule& s) {
  std::vector<Violation> out;
  if (s.r < 1) out.push_back({-1, "r must be at least 1"});
  Graph g = s.initial;
  auto degree_ok = [&](int idx) {
    if (s.delta && g.max_degree() > *s.delta)
      out.push_back({idx, "max degree " + std::to_string(g.max_degree()) + " exceeds delta " + std::to_string(*s.delta)});
  };
  degree_ok(-1);
  int last_change = -1;
  for (std::size_t k = 0; k < s.events.size(); ++k) {
    const Event& e = s.events[k];
    int idx = static_cast<int>(k);
    if (e.is_quiet()) continue;
    if (last_change >= 0 && idx - last_change < s.r)
      out.push_back({idx, "missing quiet round: change at " + std::to_string(idx) + " only " +
                              std::to_string(idx - last_change - 1) + " quiet rounds after the previous"});
    last_change = idx;
    auto c = *change_of(e.kind);
    if (!s.model.count(c)) out.push_back({idx, change_name(c) + " not in the change model"});
    if (auto err = check_event(g, e); !err.empty()) {
      out.push_back({idx, err});
      continue;
    }
    apply_event(g, e);
    degree_ok(idx);
  }
  if (last_change >= 0 && static_cast<int>(s.events.size()) - 1 - last_change < s.r - 1)
    out.push_back({last_change, "missing quiet round: trailing quiet rounds after the last change"});
  return out;
}

Graph graph_after(const Schedule& s, std::size_t k) {
  Graph g = s.initial;
  for (std::size_t i = 0; i < k && i < s.events.size(); ++i) apply_event(g, s.events[i]);
  return g;
}

nlohmann::json to_json(const Event& e) {
  nlohmann::json j;
  switch (e.kind) {
    case EventKind::Quiet: j["kind"] = "quiet"; break;
    case EventKind::EdgeIns:
    case EventKind::EdgeDel:
      j["kind"] = change_name(*change_of(e.kind));
      j["u"] = e.u;
      j["v"] = e.v;
      break;
    case EventKind::NodeIns:
      j["kind"] = "node_ins";
      j["v"] = e.v;
      j["nbrs"] = e.nbrs;
      break;
    case EventKind::NodeDel:
      j["kind"] = "node_del";
      j["v"] = e.v;
      break;
  }
  return j;
}

Event event_from_json(const nlohmann::json& j) {
  std::string k = j.at("kind").get<std::string>();
  if (k == "quiet") return Event::quiet();
  if (k == "edge_ins") return Event::edge_ins(j.at("u").get<int>(), j.at("v").get<int>());
  if (k == "edge_del") return Event::edge_del(j.at("u").get<int>(), j.at("v").get<int>());
  if (k == "node_ins") return Event::node_ins(j.at("v").get<int>(), j.value("nbrs", std::vector<int>{}));
  if (k == "node_del") return Event::node_del(j.at("v").get<int>());
  throw SimError("unknown event kind '" + k + "'");
}

nlohmann::json to_json(const Schedule& s) {
  nlohmann::json j;
  std::vector<NodeId> absent;
  int n0 = 0;
  for (NodeId v = 1; v <= s.initial.id_range(); ++v)
    if (s.initial.has_node(v)) n0 = v;
  for (NodeId v = 1; v <= n0; ++v)
    if (!s.initial.has_node(v)) absent.push_back(v);
  j["n0"] = n0;
  j["n"] = s.initial.id_range();
  if (!absent.empty()) j["absent0"] = absent;
  nlohmann::json es = nlohmann::json::array();
  for (auto [u, v] : s.initial.edges()) es.push_back({u, v});
  j["edges0"] = es;
  j["r"] = s.r;
  std::vector<std::string> model;
  for (auto c : s.model) model.push_back(change_name(c));
  j["model"] = model;
  if (s.delta) j["delta"] = *s.delta;
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : s.events) ev.push_back(to_json(e));
  j["events"] = ev;
  return j;
}

Schedule schedule_from_json(const nlohmann::json& j) {
  Schedule s;
  int n0 = j.at("n0").get<int>();
  int n = std::max(n0, j.value("n", n0));
  s.initial = Graph::with_absent(n);
  for (NodeId v = 1; v <= n0; ++v) s.initial.add_node(v);
  if (j.contains("absent0"))
    for (const auto& v : j["absent0"]) s.initial.remove_node(v.get<int>());
  for (const auto& e : j.at("edges0")) s.initial.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
  s.r = j.value("r", 1);
  for (const auto& m : j.at("model")) s.model.insert(change_from_name(m.get<std::string>()));
  if (j.contains("delta")) s.delta = j["delta"].get<int>();
  for (const auto& e : j.at("events")) s.events.push_back(event_from_json(e));
  return s;
}

bool NodeView::has(NodeId w) const { return std::binary_search(cur_neighbors.begin(), cur_neighbors.end(), w); }

bool NodeView::gained(NodeId w) const {
  return has(w) && !std::binary_search(prev_neighbors.begin(), prev_neighbors.end(), w);
}

std::vector<NodeId> NodeView::new_neighbors() const {
  std::vector<NodeId> out;
  std::set_difference(cur_neighbors.begin(), cur_neighbors.end(), prev_neighbors.begin(), prev_neighbors.end(),
                      std::back_inserter(out));
  return out;
}

std::vector<NodeId> NodeView::lost_neighbors() const {
  std::vector<NodeId> out;
  std::set_difference(prev_neighbors.begin(), prev_neighbors.end(), cur_neighbors.begin(), cur_neighbors.end(),
                      std::back_inserter(out));
  return out;
}

const BitString* NodeView::msg(NodeId w) const {
  if (!inbox) return nullptr;
  auto it = inbox->find(w);
  return it == inbox->end() ? nullptr : &it->second;
}

std::unique_ptr<NodeState> Protocol::init_inserted(NodeId, int, const std::vector<NodeId>&,
                                                   std::shared_ptr<const Graph>, int) const {
  throw SimError(name() + " does not support node insertions");
}

namespace {

std::string copy_str(const Copy& c) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i].first << "-" << c[i].second;
  os << "}";
  return os.str();
}

// Truth for one graph version, reused across the quiet rounds that follow.
// Listing problems need the copies; detection only needs membership bits,
// which a first-hit search answers far faster on dense hosts.
struct Truth {
  CopySet all;
  std::map<NodeId, CopySet> by_node;
  std::set<NodeId> members;
  bool any = false;
};

std::vector<Failure> grade_with(Problem p, const Truth& t, const Graph& truth,
                                const std::map<NodeId, Output>& outputs) {
  std::vector<Failure> out;
  static const CopySet kNone;
  auto expect = [&](NodeId v) -> const CopySet& {
    auto it = t.by_node.find(v);
    return it == t.by_node.end() ? kNone : it->second;
  };
  auto get = [&](NodeId v) -> const Output* {
    auto it = outputs.find(v);
    return it == outputs.end() ? nullptr : &it->second;
  };
  switch (p) {
    case Problem::MemList:
      for (NodeId v : truth.nodes()) {
        const Output* o = get(v);
        const CopySet* got = o ? std::get_if<CopySet>(o) : nullptr;
        const CopySet& want = expect(v);
        if (!got) {
          if (!want.empty()) out.push_back({v, "wrong_output", "no output"});
          continue;
        }
        if (*got == want) continue;
        for (const auto& c : want)
          if (!got->count(c)) {
            out.push_back({v, "missed_copy", "does not list " + copy_str(c)});
            break;
          }
        for (const auto& c : *got)
          if (!want.count(c)) {
            out.push_back({v, "false_listing", "lists " + copy_str(c)});
            break;
          }
      }
      break;
    case Problem::MemDetect:
      for (NodeId v : truth.nodes()) {
        const Output* o = get(v);
        bool got = o && std::get<bool>(*o);
        bool want = t.members.count(v) > 0;
        if (got != want) out.push_back({v, "wrong_output", want ? "says No, is in a copy" : "says Yes, in no copy"});
      }
      break;
    case Problem::List: {
      CopySet listed;
      for (NodeId v : truth.nodes()) {
        const Output* o = get(v);
        if (!o) continue;
        for (const auto& c : std::get<CopySet>(*o)) {
          if (!t.all.count(c)) {
            out.push_back({v, "false_listing", "lists " + copy_str(c)});
            break;
          }
          listed.insert(c);
        }
      }
      for (const auto& c : t.all)
        if (!listed.count(c)) {
          out.push_back({0, "missed_copy", "nobody lists " + copy_str(c)});
          break;
        }
      break;
    }
    case Problem::Detect: {
      bool any = false;
      for (NodeId v : truth.nodes()) {
        const Output* o = get(v);
        if (o && std::get<bool>(*o)) {
          any = true;
          if (!t.any) {
            out.push_back({v, "wrong_output", "says Yes in a graph without copies"});
            break;
          }
        }
      }
      if (t.any && !any) out.push_back({0, "no_yes", "a copy exists and every node says No"});
      break;
    }
  }
  return out;
}

Truth compute_truth(const Graph& g, const Graph& h, Problem p) {
  Truth t;
  switch (p) {
    case Problem::MemList:
      t.all = enumerate_copies(g, h);
      t.by_node = index_by_node(t.all);
      break;
    case Problem::List: t.all = enumerate_copies(g, h); break;
    case Problem::MemDetect:
      for (NodeId v : g.nodes())
        if (in_some_copy(g, h, v)) t.members.insert(v);
      break;
    case Problem::Detect: t.any = contains_copy(g, h); break;
  }
  return t;
}

void check_kind(Problem p, const Output& o, const std::string& who) {
  bool want_set = is_listing(p);
  if (want_set != std::holds_alternative<CopySet>(o))
    throw SimError(who + " emitted an output of the wrong kind for " + problem_name(p));
}

}  // namespace

std::vector<Failure> grade(Problem p, const Graph& h, const Graph& truth, const std::map<NodeId, Output>& outputs) {
  for (const auto& [v, o] : outputs) check_kind(p, o, "node " + std::to_string(v));
  return grade_with(p, compute_truth(truth, h, p), truth, outputs);
}

RunReport run(const Protocol& protocol, const Graph& h, const Schedule& schedule, const RunOptions& opts) {
  if (auto vs = validate(schedule); !vs.empty())
    throw SimError("invalid schedule: event " + std::to_string(vs.front().index) + ": " + vs.front().message);
  if (opts.enforce_model)
    for (auto c : schedule.model)
      if (!protocol.supports().count(c))
        throw SimError(protocol.name() + " does not support " + change_name(c));

  const Problem problem = protocol.problem();
  const int n = schedule.n();
  auto g0 = std::make_shared<const Graph>(schedule.initial);
  Graph g = schedule.initial;

  auto stepped = [&](NodeId v) { return !opts.only || opts.only->count(v) > 0; };
  auto check_closed = [&](NodeId v) {
    if (!stepped(v)) return;
    for (NodeId w : g.neighbors(v))
      if (!stepped(w))
        throw SimError("node " + std::to_string(v) + " gained neighbor " + std::to_string(w) + " outside the stepped set");
  };

  std::map<NodeId, std::unique_ptr<NodeState>> states;
  for (NodeId v : g.nodes())
    if (stepped(v)) {
      check_closed(v);
      states[v] = protocol.init(v, n, g0);
    }

  RunReport rep;
  rep.protocol = protocol.name();
  rep.problem = problem;

  int total = static_cast<int>(schedule.events.size()) + opts.tail_rounds;
  if (total == 0) total = 1;
  int last_change = 0;  // round of the latest change, 0 before any
  std::optional<Truth> truth;

  auto fail = [&](int round, const Failure& f) {
    ++rep.failures;
    if (rep.verdict.pass) rep.verdict = {false, f.kind, round, f.node, f.reason};
  };

  std::map<NodeId, std::vector<NodeId>> saved_prev;
  std::map<NodeId, Inbox> inboxes;
  std::map<NodeId, Output> outputs;

  for (int round = 1; round <= total; ++round) {
    Event ev = round <= static_cast<int>(schedule.events.size()) ? schedule.events[round - 1] : Event::quiet();
    saved_prev.clear();
    if (!ev.is_quiet()) {
      auto save = [&](NodeId x) {
        if (g.has_node(x) && !saved_prev.count(x)) saved_prev[x] = g.neighbors(x);
      };
      switch (ev.kind) {
        case EventKind::EdgeIns:
        case EventKind::EdgeDel: save(ev.u); save(ev.v); break;
        case EventKind::NodeIns:
          for (NodeId w : ev.nbrs) save(w);
          saved_prev[ev.v] = {};
          break;
        case EventKind::NodeDel:
          for (NodeId w : g.neighbors(ev.v)) save(w);
          break;
        default: break;
      }
      apply_event(g, ev);
      for (const auto& [x, _] : saved_prev) check_closed(x);
      if (ev.kind == EventKind::NodeIns && stepped(ev.v))
        states[ev.v] = protocol.init_inserted(ev.v, n, ev.nbrs, g0, round);
      if (ev.kind == EventKind::NodeDel) {
        states.erase(ev.v);
        saved_prev.erase(ev.v);
      }
      last_change = round;
      truth.reset();
    }

    auto view_of = [&](NodeId v) {
      NodeView view;
      view.self = v;
      const auto& cur = g.neighbors(v);
      view.cur_neighbors = std::span<const NodeId>(cur);
      auto it = saved_prev.find(v);
      view.prev_neighbors = it == saved_prev.end() ? view.cur_neighbors : std::span<const NodeId>(it->second);
      return view;
    };

    RoundRecord rec;
    rec.round = round;
    rec.event = ev;
    inboxes.clear();
    bool aborted = false;
    for (auto& [v, st] : states) {
      NodeView view = view_of(v);
      Outbox out = st->send(view, round);
      for (auto& [w, msg] : out) {
        if (!view.has(w))
          throw SimError(protocol.name() + ": node " + std::to_string(v) + " sent to non-neighbor " + std::to_string(w));
        if (msg.empty()) continue;
        int b = static_cast<int>(msg.size());
        rec.max_bits = std::max(rec.max_bits, b);
        rep.total_bits += b;
        ++rep.messages;
        if (opts.keep_rounds) rec.bits[{v, w}] = b;
        if (opts.bandwidth_cap && b > *opts.bandwidth_cap && rep.verdict.pass) {
          fail(round, {v, "cap_violation",
                       std::to_string(b) + "-bit message to " + std::to_string(w) + " exceeds cap " +
                           std::to_string(*opts.bandwidth_cap)});
          aborted = true;
        }
        inboxes[w][v] = std::move(msg);
      }
    }
    rep.max_bits = std::max(rep.max_bits, rec.max_bits);
    if (aborted) {
      rep.rounds_run = round;
      if (opts.keep_rounds) rep.rounds.push_back(std::move(rec));
      break;
    }

    outputs.clear();
    static const Inbox kEmpty;
    for (auto& [v, st] : states) {
      NodeView view = view_of(v);
      auto ib = inboxes.find(v);
      view.inbox = ib == inboxes.end() ? &kEmpty : &ib->second;
      Output o = st->receive(view, round);
      check_kind(problem, o, protocol.name() + " at node " + std::to_string(v));
      outputs.emplace(v, std::move(o));
      if (opts.record_all_transcripts || opts.watch.count(v))
        rep.transcripts[v].push_back({round, std::vector<NodeId>(view.cur_neighbors.begin(), view.cur_neighbors.end()),
                                      *view.inbox});
    }
    for (NodeId v : opts.watch)
      if (!states.count(v)) rep.transcripts[v].push_back({round, {}, {}});

    if (opts.observer) opts.observer(round, g, states);

    bool graded = opts.grade && !opts.only && (last_change == 0 || round >= last_change + schedule.r - 1);
    rec.graded = graded;
    if (graded) {
      if (!truth) truth = compute_truth(g, h, problem);
      for (const auto& f : grade_with(problem, *truth, g, outputs)) fail(round, f);
    }
    if (opts.keep_rounds && opts.keep_outputs)
      for (auto& [v, o] : outputs) {
        bool keep = std::visit([](const auto& x) {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, bool>) return x;
          else return !x.empty();
        }, o);
        if (keep) rec.outputs.emplace(v, o);
      }
    if (opts.keep_rounds) rep.rounds.push_back(std::move(rec));
    rep.rounds_run = round;
  }
  return rep;
}

const Transcript& transcript(const RunReport& report, NodeId v) {
  auto it = report.transcripts.find(v);
  if (it == report.transcripts.end()) throw SimError("no transcript recorded for node " + std::to_string(v));
  return it->second;
}

nlohmann::json to_json(const Output& o) {
  if (auto b = std::get_if<bool>(&o)) return *b;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : std::get<CopySet>(o)) j.push_back(copy_to_json(c));
  return j;
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["protocol"] = r.protocol;
  j["problem"] = problem_name(r.problem);
  j["rounds_run"] = r.rounds_run;
  j["max_bits"] = r.max_bits;
  j["total_bits"] = r.total_bits;
  j["messages"] = r.messages;
  j["failures"] = r.failures;
  nlohmann::json v;
  v["pass"] = r.verdict.pass;
  if (!r.verdict.pass) {
    v["kind"] = r.verdict.kind;
    v["round"] = r.verdict.round;
    v["node"] = r.verdict.node;
    v["reason"] = r.verdict.reason;
  }
  j["verdict"] = v;
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& rec : r.rounds) {
    nlohmann::json o;
    o["round"] = rec.round;
    o["event"] = to_json(rec.event);
    o["graded"] = rec.graded;
    o["max_bits"] = rec.max_bits;
    nlohmann::json outs = nlohmann::json::object();
    for (const auto& [node, out] : rec.outputs) outs[std::to_string(node)] = to_json(out);
    o["outputs"] = outs;
    nlohmann::json bits = nlohmann::json::array();
    for (const auto& [e, b] : rec.bits) bits.push_back({e.first, e.second, b});
    o["bits"] = bits;
    rounds.push_back(o);
  }
  j["per_round"] = rounds;
  if (!r.transcripts.empty()) {
    nlohmann::json ts = nlohmann::json::object();
    for (const auto& [node, t] : r.transcripts) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& e : t) {
        nlohmann::json inbox = nlohmann::json::object();
        for (const auto& [from, msg] : e.inbox) inbox[std::to_string(from)] = {{"hex", msg.hex()}, {"len", msg.size()}};
        arr.push_back({{"round", e.round}, {"neighbors", e.neighbors}, {"inbox", inbox}});
      }
      ts[std::to_string(node)] = arr;
    }
    j["transcripts"] = ts;
  }
  return j;
}

}  // namespace dynsub
