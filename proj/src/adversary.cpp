#include "dynsub/adversary.hpp"

#include "dynsub/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace dynsub {

namespace {

// ---------------------------------------------------------------------------
// Reference protocols

class SilenceNode : public NodeState {
 public:
  SilenceNode(NodeId self, Problem p, CopySet g0) : self_(self), p_(p), g0_(std::move(g0)) {}
  Outbox send(const NodeView&, int) override { return {}; }
  Output receive(const NodeView& view, int) override {
    CopySet out;
    for (const auto& c : g0_) {
      bool intact = true;
      for (const auto& [x, y] : c)
        if ((x == self_ && !view.has(y)) || (y == self_ && !view.has(x))) intact = false;
      if (intact) out.insert(c);
    }
    if (is_listing(p_)) return out;
    return !out.empty();
  }

 private:
  NodeId self_;
  Problem p_;
  CopySet g0_;
};

class SilenceProtocol : public Protocol {
 public:
  SilenceProtocol(const Graph& h, Problem p) : h_(h), p_(p) {}
  std::string name() const override { return "silence"; }
  Problem problem() const override { return p_; }
  ChangeModel supports() const override {
    return {ChangeType::EdgeIns, ChangeType::EdgeDel, ChangeType::NodeIns, ChangeType::NodeDel};
  }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph> g0) const override {
    return std::make_unique<SilenceNode>(self, p_, copies_containing(*g0, h_, self));
  }
  std::unique_ptr<NodeState> init_inserted(NodeId self, int, const std::vector<NodeId>&, std::shared_ptr<const Graph>,
                                           int) const override {
    return std::make_unique<SilenceNode>(self, p_, CopySet{});
  }

 private:
  Graph h_;
  Problem p_;
};

class ConstantNode : public NodeState {
 public:
  explicit ConstantNode(Problem p) : p_(p) {}
  Outbox send(const NodeView& view, int) override {
    Outbox out;
    BitString one;
    one.push(true);
    for (NodeId x : view.cur_neighbors) out[x] = one;
    return out;
  }
  Output receive(const NodeView& view, int) override {
    if (is_listing(p_)) return CopySet{};
    return view.cur_neighbors.size() >= 2;
  }

 private:
  Problem p_;
};

class ConstantProtocol : public Protocol {
 public:
  explicit ConstantProtocol(Problem p) : p_(p) {}
  std::string name() const override { return "constant"; }
  Problem problem() const override { return p_; }
  ChangeModel supports() const override {
    return {ChangeType::EdgeIns, ChangeType::EdgeDel, ChangeType::NodeIns, ChangeType::NodeDel};
  }
  std::unique_ptr<NodeState> init(NodeId, int, std::shared_ptr<const Graph>) const override {
    return std::make_unique<ConstantNode>(p_);
  }
  std::unique_ptr<NodeState> init_inserted(NodeId, int, const std::vector<NodeId>&, std::shared_ptr<const Graph>,
                                           int) const override {
    return std::make_unique<ConstantNode>(p_);
  }

 private:
  Problem p_;
};

class NeighborIdNode : public NodeState {
 public:
  explicit NeighborIdNode(int width) : w_(width), mask_(width >= 63 ? ~0ULL : (1ULL << width) - 1) {}
  Outbox send(const NodeView& view, int) override {
    BitString msg;
    for (NodeId x : view.cur_neighbors) msg.append(static_cast<std::uint64_t>(x) & mask_, w_);
    Outbox out;
    for (NodeId x : view.cur_neighbors) out[x] = msg;
    return out;
  }
  Output receive(const NodeView& view, int) override {
    for (const auto& [x, msg] : *view.inbox) {
      std::set<std::uint64_t> seen;
      BitReader rd(msg);
      for (std::size_t k = 0; k + w_ <= msg.size(); k += w_) seen.insert(rd.read(w_));
      for (NodeId y : view.cur_neighbors)
        if (y != x && seen.count(static_cast<std::uint64_t>(y) & mask_)) return true;
    }
    return false;
  }

 private:
  int w_;
  std::uint64_t mask_;
};

class NeighborIdProtocol : public Protocol {
 public:
  explicit NeighborIdProtocol(int width) : w_(width) {}
  std::string name() const override { return "neighbor_id" + std::to_string(w_); }
  Problem problem() const override { return Problem::MemDetect; }
  ChangeModel supports() const override {
    return {ChangeType::EdgeIns, ChangeType::EdgeDel, ChangeType::NodeIns, ChangeType::NodeDel};
  }
  std::unique_ptr<NodeState> init(NodeId, int, std::shared_ptr<const Graph>) const override {
    return std::make_unique<NeighborIdNode>(w_);
  }
  std::unique_ptr<NodeState> init_inserted(NodeId, int, const std::vector<NodeId>&, std::shared_ptr<const Graph>,
                                           int) const override {
    return std::make_unique<NeighborIdNode>(w_);
  }

 private:
  int w_;
};

class TruncNode : public NodeState {
 public:
  TruncNode(std::unique_ptr<NodeState> inner, int cap) : inner_(std::move(inner)), cap_(cap) {}
  Outbox send(const NodeView& view, int round) override {
    Outbox out = inner_->send(view, round);
    for (auto& [w, msg] : out)
      if (static_cast<int>(msg.size()) > cap_) msg = msg.prefix(cap_);
    return out;
  }
  Output receive(const NodeView& view, int round) override { return inner_->receive(view, round); }
  nlohmann::json debug() const override { return inner_->debug(); }

 private:
  std::unique_ptr<NodeState> inner_;
  int cap_;
};

class TruncProtocol : public Protocol {
 public:
  TruncProtocol(std::shared_ptr<const Protocol> inner, int cap) : inner_(std::move(inner)), cap_(cap) {}
  std::string name() const override { return inner_->name() + "@" + std::to_string(cap_); }
  Problem problem() const override { return inner_->problem(); }
  ChangeModel supports() const override { return inner_->supports(); }
  std::unique_ptr<NodeState> init(NodeId self, int n, std::shared_ptr<const Graph> g0) const override {
    return std::make_unique<TruncNode>(inner_->init(self, n, std::move(g0)), cap_);
  }
  std::unique_ptr<NodeState> init_inserted(NodeId self, int n, const std::vector<NodeId>& nbrs,
                                           std::shared_ptr<const Graph> g0, int round) const override {
    return std::make_unique<TruncNode>(inner_->init_inserted(self, n, nbrs, std::move(g0), round), cap_);
  }

 private:
  std::shared_ptr<const Protocol> inner_;
  int cap_;
};

std::shared_ptr<const Protocol> borrow(const Protocol& p) {
  return std::shared_ptr<const Protocol>(&p, [](const Protocol*) {});
}

// ---------------------------------------------------------------------------
// Helpers

Graph without_node(const Graph& h, NodeId u) {
  Graph g = Graph::with_absent(h.id_range());
  for (NodeId x : h.nodes())
    if (x != u) g.add_node(x);
  for (auto [x, y] : h.edges())
    if (x != u && y != u) g.add_edge(x, y);
  return g;
}

Schedule one_change(const Graph& g0, ChangeType c, std::optional<Event> e, int r) {
  Schedule s;
  s.initial = g0;
  s.r = r;
  s.model = {c};
  s.push(e ? *e : Event::quiet()).pad(r - 1);
  return s;
}

const TranscriptEntry* entry_at(const Transcript& tr, int round) {
  for (const auto& e : tr)
    if (e.round == round) return &e;
  return nullptr;
}

bool transcripts_match(const Transcript& x, const Transcript& y, int upto, std::optional<int>* first = nullptr) {
  for (int k = 1; k <= upto; ++k) {
    const auto *ex = entry_at(x, k), *ey = entry_at(y, k);
    if (!ex != !ey || (ex && !(*ex == *ey))) {
      if (first) *first = k;
      return false;
    }
  }
  return true;
}

Output output_at(const RunReport& rep, int round, NodeId w, Problem p) {
  if (round >= 1 && round <= static_cast<int>(rep.rounds.size())) {
    const auto& outs = rep.rounds[round - 1].outputs;
    if (auto it = outs.find(w); it != outs.end()) return it->second;
  }
  if (is_listing(p)) return CopySet{};
  return false;
}

bool says_yes(const Output& o) {
  if (auto b = std::get_if<bool>(&o)) return *b;
  return !std::get<CopySet>(o).empty();
}

// Fresh IDs for a host built around h: `order` lists the nodes of h that keep
// a single copy, numbered 1..k in that order.
struct Relabel {
  std::map<NodeId, NodeId> id;
  int next = 1;
  NodeId take(NodeId x) { return id[x] = next++; }
};

Copy map_copy(const Graph& h, const std::map<NodeId, NodeId>& m) {
  Copy c;
  for (auto [x, y] : h.edges()) c.push_back(make_edge(m.at(x), m.at(y)));
  return canon(std::move(c));
}

std::vector<NodeId> nbrs_except(const Graph& h, NodeId x, const std::set<NodeId>& skip) {
  std::vector<NodeId> out;
  for (NodeId y : h.neighbors(x))
    if (!skip.count(y)) out.push_back(y);
  return out;
}

}  // namespace

std::unique_ptr<Protocol> silence_protocol(const Graph& h, Problem p) { return std::make_unique<SilenceProtocol>(h, p); }
std::unique_ptr<Protocol> constant_protocol(Problem p) { return std::make_unique<ConstantProtocol>(p); }
std::unique_ptr<Protocol> neighbor_id_protocol(int width) {
  if (width < 1) throw std::invalid_argument("neighbor_id_protocol: width must be positive");
  return std::make_unique<NeighborIdProtocol>(width);
}
std::unique_ptr<Protocol> truncate(std::shared_ptr<const Protocol> inner, int cap) {
  if (cap < 0) throw std::invalid_argument("truncate: negative cap");
  return std::make_unique<TruncProtocol>(std::move(inner), cap);
}

// ---------------------------------------------------------------------------
// Scenario pairs

Output expected_output(const Schedule& s, int round, const Graph& h, Problem p, NodeId w) {
  Graph g = graph_after(s, static_cast<std::size_t>(std::max(round, 1)));
  switch (p) {
    case Problem::MemList: return g.has_node(w) ? copies_containing(g, h, w) : CopySet{};
    case Problem::MemDetect: return g.has_node(w) && !copies_containing(g, h, w).empty();
    case Problem::List: return enumerate_copies(g, h);
    case Problem::Detect: return contains_copy(g, h);
  }
  return false;
}

ScenarioPair locality_pair(const Graph& h, ChangeType change, int T, Problem p) {
  if (T < 0) throw std::invalid_argument("locality_pair: negative T");
  GraphParams P = params(h);
  int limit = change == ChangeType::NodeDel ? P.r_H_prime : P.r_H;
  if (T >= limit)
    throw std::invalid_argument("locality_pair: T = " + std::to_string(T) + " is not below " +
                                std::string(change == ChangeType::NodeDel ? "r_H' = " : "r_H = ") +
                                std::to_string(limit) + "; no impossibility exists");
  int r = std::max(T, 1);
  ScenarioPair out;
  out.label = "locality/" + change_name(change) + "/T=" + std::to_string(T);
  out.graded_round = T;
  out.problem = p;

  // Far node and edge realizing ne_diam, or far pair realizing diam.
  auto far_edge = [&]() -> std::pair<NodeId, Edge> {
    for (NodeId w : h.nodes())
      for (const auto& e : h.edges())
        if (node_edge_distance(h, w, e) == P.ne_diam) return {w, e};
    throw std::logic_error("no node-edge pair at ne_diam");
  };
  auto far_pair = [&]() -> std::pair<NodeId, NodeId> {
    for (NodeId u : h.nodes())
      for (NodeId w : h.nodes())
        if (distance(h, u, w) == P.diam) return {u, w};
    throw std::logic_error("no pair at diam");
  };

  switch (change) {
    case ChangeType::EdgeIns: {
      auto [w, e] = far_edge();
      Graph g0 = h;
      g0.remove_edge(e.first, e.second);
      out.a = one_change(g0, change, Event::edge_ins(e.first, e.second), r);
      out.b = one_change(g0, change, std::nullopt, r);
      out.witness = w;
      break;
    }
    case ChangeType::EdgeDel: {
      auto [w, e] = far_edge();
      out.a = one_change(h, change, Event::edge_del(e.first, e.second), r);
      out.b = one_change(h, change, std::nullopt, r);
      out.witness = w;
      break;
    }
    case ChangeType::NodeDel: {
      auto [u, w] = far_pair();
      out.a = one_change(h, change, Event::node_del(u), r);
      out.b = one_change(h, change, std::nullopt, r);
      out.witness = w;
      break;
    }
    case ChangeType::NodeIns: {
      if (P.r_H == P.r_H_prime) {
        auto [u, w] = far_pair();
        Graph g0 = without_node(h, u);
        out.a = one_change(g0, change, Event::node_ins(u, h.neighbors(u)), r);
        out.b = one_change(g0, change, std::nullopt, r);
        out.witness = w;
      } else {
        // u arrives in both branches; only the edge {u,v} differs.
        auto [x, e] = far_edge();
        NodeId u = e.first, v = e.second;
        Graph g0 = without_node(h, u);
        auto some = nbrs_except(h, u, {v});
        out.a = one_change(g0, change, Event::node_ins(u, h.neighbors(u)), r);
        out.b = one_change(g0, change, Event::node_ins(u, some), r);
        out.witness = x;
      }
      break;
    }
  }
  out.truth_a = expected_output(out.a, 1, h, p, out.witness);
  out.truth_b = expected_output(out.b, 1, h, p, out.witness);
  if (out.truth_a == out.truth_b) throw std::logic_error("locality_pair: branches agree on the witness");
  return out;
}

ScenarioPair far_deletion_pair(const Graph& h, const Protocol& protocol, ChangeType model) {
  GraphParams P = params(h);
  bool edges = model == ChangeType::EdgeDel;
  if (!edges && model != ChangeType::NodeDel) throw std::invalid_argument("far_deletion_pair: deletion model only");
  if (edges ? P.ne_rad < 3 : P.rad < 3)
    throw std::invalid_argument(std::string("far_deletion_pair: needs ") + (edges ? "ne_rad" : "rad") + " >= 3");

  // Who lists the copy when nothing happens?
  Schedule quiet = one_change(h, model, std::nullopt, 1);
  RunOptions opts;
  opts.grade = false;
  opts.enforce_model = false;
  auto rep = run(protocol, h, quiet, opts);
  NodeId w = h.nodes().front();
  for (const auto& [v, o] : rep.rounds.front().outputs)
    if (auto cs = std::get_if<CopySet>(&o); cs && !cs->empty()) {
      w = v;
      break;
    }

  ScenarioPair out;
  out.label = std::string("far_deletion/") + change_name(model);
  out.problem = Problem::List;
  out.graded_round = 1;
  out.witness = w;
  std::optional<Event> ev;
  if (edges) {
    for (const auto& e : h.edges())
      if (node_edge_distance(h, w, e) >= 3) {
        ev = Event::edge_del(e.first, e.second);
        break;
      }
  } else {
    for (NodeId u : h.nodes())
      if (auto d = distance(h, w, u); d && *d >= 3) {
        ev = Event::node_del(u);
        break;
      }
  }
  out.a = one_change(h, model, ev, 1);
  out.b = quiet;
  out.truth_a = expected_output(out.a, 1, h, out.problem, w);
  out.truth_b = expected_output(out.b, 1, h, out.problem, w);
  return out;
}

nlohmann::json IndistinguishVerdict::to_json() const {
  nlohmann::json j{{"result", result},
                   {"compared_rounds", compared_rounds},
                   {"transcripts_equal", transcripts_equal},
                   {"truths_differ", truths_differ},
                   {"outputs_equal", outputs_equal},
                   {"failing_branches", failing_branches}};
  if (first_difference) j["first_difference"] = *first_difference;
  return j;
}

IndistinguishVerdict assert_indistinguishable(const ScenarioPair& pair, const Protocol& protocol, const Graph& h,
                                              std::optional<Problem> problem) {
  Problem p = problem.value_or(pair.problem);
  Output ta = pair.truth_a, tb = pair.truth_b;
  if (p != pair.problem) {
    ta = expected_output(pair.a, pair.graded_round, h, p, pair.witness);
    tb = expected_output(pair.b, pair.graded_round, h, p, pair.witness);
  }
  RunOptions opts;
  opts.enforce_model = false;
  opts.watch = {pair.witness};
  auto ra = run(protocol, h, pair.a, opts);
  auto rb = run(protocol, h, pair.b, opts);

  IndistinguishVerdict v;
  v.compared_rounds = pair.graded_round;
  v.transcripts_equal = transcripts_match(transcript(ra, pair.witness), transcript(rb, pair.witness),
                                          pair.graded_round, &v.first_difference);
  v.truths_differ = ta != tb;
  int at = std::max(pair.graded_round, 1);
  v.outputs_equal = output_at(ra, at, pair.witness, protocol.problem()) ==
                    output_at(rb, at, pair.witness, protocol.problem());
  if (!ra.verdict.pass) v.failing_branches.push_back("a");
  if (!rb.verdict.pass) v.failing_branches.push_back("b");
  v.result = v.transcripts_equal && v.truths_differ ? "violation" : "distinguished";
  return v;
}

// ---------------------------------------------------------------------------
// Clique hard instances

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
    case Scenario::S4: return "S4";
  }
  return "?";
}

namespace {

struct Gadget {
  int s = 3, t = 1, n = 0;
  bool mixed = false;
  std::vector<std::vector<NodeId>> K;
  std::vector<NodeId> I;
  int t_final = 0;
  Graph initial;
};

Gadget make_gadget(int s, int t, int n, bool mixed) {
  if (s < 3) throw std::invalid_argument("clique instance: s must be at least 3");
  if (t < 1) throw std::invalid_argument("clique instance: t must be at least 1");
  if (n < (s - 2) * t + 4) throw std::invalid_argument("clique instance: n must be at least (s-2)t + 4");
  Gadget g;
  g.s = s;
  g.t = t;
  g.n = n;
  g.mixed = mixed;
  g.t_final = 2 * (s - 2) * t + 1;
  g.initial = Graph::with_absent(n);
  NodeId next = 1;
  for (int j = 0; j < t; ++j) {
    std::vector<NodeId> k;
    for (int m = 0; m < s - 2; ++m) {
      k.push_back(next);
      g.initial.add_node(next++);
    }
    for (std::size_t x = 0; x < k.size(); ++x)
      for (std::size_t y = x + 1; y < k.size(); ++y) g.initial.add_edge(k[x], k[y]);
    g.K.push_back(k);
  }
  for (NodeId v = next; v <= n; ++v) {
    g.I.push_back(v);
    if (!mixed) g.initial.add_node(v);
  }
  return g;
}

// create(u, K^j, v) for each entry, then `last` at t_final (quiet if absent).
Schedule gadget_schedule(const Gadget& g, const std::vector<std::tuple<NodeId, int, NodeId>>& creates,
                         std::optional<Event> last) {
  const int len = 2 * (g.s - 2);
  std::vector<std::optional<Edge>> slot(g.t_final - 1);
  std::set<int> used;
  for (auto [u, j, v] : creates) {
    if (j < 1 || j > g.t) throw std::invalid_argument("clique instance: gadget index out of range");
    if (!used.insert(j).second) throw std::invalid_argument("clique instance: two creates share K^" + std::to_string(j));
    int base = len * (j - 1);
    for (int m = 0; m < g.s - 2; ++m) {
      NodeId y = g.K[j - 1][m];
      slot[base + 2 * m] = Edge{u, y};
      slot[base + 2 * m + 1] = Edge{v, y};
    }
  }
  Schedule s;
  s.initial = g.initial;
  s.r = 1;
  s.model = {ChangeType::EdgeIns};
  if (g.mixed) s.model.insert(ChangeType::NodeIns);
  std::set<NodeId> present;
  for (auto& e : slot) {
    if (!e) {
      s.push(Event::quiet());
      continue;
    }
    auto [x, y] = *e;
    if (g.mixed && !present.count(x)) {
      s.push(Event::node_ins(x, {y}));
      present.insert(x);
    } else {
      s.push(Event::edge_ins(x, y));
    }
  }
  s.push(last ? *last : Event::quiet());
  return s;
}

std::vector<std::tuple<NodeId, int, NodeId>> scenario_creates(Scenario sc, const CliqueParams& p) {
  switch (sc) {
    case Scenario::S1:
    case Scenario::S4: return {{p.a, p.i, p.b}};
    case Scenario::S2: return {{p.a, p.i, p.c}, {p.d, p.istar, p.b}};
    case Scenario::S3: return {{p.d, p.i, p.b}, {p.a, p.istar, p.c}};
  }
  return {};
}

Event scenario_final(Scenario sc, const CliqueParams& p) {
  if (sc == Scenario::S4) return Event::node_ins(p.c, {p.a, p.b});
  return Event::edge_ins(p.a, p.b);
}

// Bits received by `who` from `from` (in that order), rounds 1..upto.
std::string inbox_key(const Transcript& tr, const std::vector<NodeId>& from, int upto) {
  std::string key;
  for (const auto& e : tr) {
    if (e.round > upto) break;
    for (std::size_t k = 0; k < from.size(); ++k) {
      auto it = e.inbox.find(from[k]);
      if (it == e.inbox.end()) continue;
      key += std::to_string(e.round) + ":" + std::to_string(k) + "=" + it->second.str() + ";";
    }
  }
  return key;
}

std::string msg_at(const Transcript& tr, NodeId from, int round) {
  for (const auto& e : tr)
    if (e.round == round) {
      auto it = e.inbox.find(from);
      return it == e.inbox.end() ? "-" : it->second.str();
    }
  return "-";
}

RunReport sub_run(const Protocol& p, const Graph& h, const Schedule& s, std::set<NodeId> only, std::set<NodeId> watch,
                  bool all = false) {
  RunOptions o;
  o.grade = false;
  o.keep_rounds = false;
  o.only = std::move(only);
  o.watch = std::move(watch);
  o.record_all_transcripts = all;
  return run(p, h, s, o);
}

std::set<NodeId> members(const Gadget& g, int j, std::initializer_list<NodeId> extra) {
  std::set<NodeId> out(g.K[j - 1].begin(), g.K[j - 1].end());
  out.insert(extra);
  return out;
}

nlohmann::json params_json(const CliqueParams& p) {
  return {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}, {"i", p.i}, {"istar", p.istar}};
}

}  // namespace

CliqueInstance clique_instance(int s, int t, int n, Scenario scenario, const CliqueParams& p, bool mixed) {
  Gadget g = make_gadget(s, t, n, mixed);
  std::set<NodeId> inI(g.I.begin(), g.I.end());
  std::set<NodeId> abcd{p.a, p.b, p.c, p.d};
  if (abcd.size() != 4) throw std::invalid_argument("clique instance: a, b, c, d must be distinct");
  for (NodeId x : abcd)
    if (!inI.count(x)) throw std::invalid_argument("clique instance: node " + std::to_string(x) + " is not in I");
  if (p.i == p.istar) throw std::invalid_argument("clique instance: i and i* must differ");
  if (p.i < 1 || p.i > t || p.istar < 1 || p.istar > t) throw std::invalid_argument("clique instance: index out of range");
  if (scenario == Scenario::S4 && !mixed) throw std::invalid_argument("clique instance: S4 needs node insertions");

  CliqueInstance ci;
  ci.s = s;
  ci.t = t;
  ci.n = n;
  ci.mixed = mixed;
  ci.K = g.K;
  ci.I = g.I;
  ci.t_final = g.t_final;
  ci.p = p;
  ci.scenario = scenario;
  ci.schedule = gadget_schedule(g, scenario_creates(scenario, p), scenario_final(scenario, p));
  return ci;
}

nlohmann::json AttackReport::to_json() const {
  return {{"result", result}, {"pair", pair}, {"classes", classes}, {"candidates", candidates}, {"details", details}};
}

AttackReport attack_memdetect_clique(const Protocol& protocol, int s, int cap, int t, int n, const AttackOptions& opt) {
  Gadget g = make_gadget(s, t, n, false);
  auto proto = truncate(borrow(protocol), cap);
  const Graph target = complete_graph(s);
  const int tf = g.t_final;
  AttackReport rep;
  rep.result = "capacity";
  rep.details = nlohmann::json::array();
  rep.candidates = static_cast<int>(g.I.size()) - 1;

  // Messages from K^j that `to` sees in create(from_first, K^j, to) alone.
  auto k_key = [&](NodeId first, int j, NodeId second, NodeId listener) {
    Schedule sch = gadget_schedule(g, {{first, j, second}}, std::nullopt);
    auto r = sub_run(*proto, target, sch, members(g, j, {first, second}), {listener});
    return inbox_key(transcript(r, listener), g.K[j - 1], tf);
  };

  int tried = 0;
  for (NodeId b : g.I) {
    if (tried++ >= opt.max_b) break;
    nlohmann::json step{{"b", b}};
    std::vector<NodeId> others;
    for (NodeId v : g.I)
      if (v != b) others.push_back(v);

    // Group partners v by what K^j tells b in create(v, K^j, b), all j.
    std::vector<std::string> keys(others.size());
    parallel_for(static_cast<int>(others.size()), opt.workers, [&](int k) {
      std::string key;
      for (int j = 1; j <= t; ++j) key += k_key(others[k], j, b, b) + "|";
      keys[k] = key;
    });
    std::map<std::string, std::vector<NodeId>> classes;
    for (std::size_t k = 0; k < others.size(); ++k) classes[keys[k]].push_back(others[k]);
    step["classes"] = classes.size();
    rep.classes = static_cast<int>(classes.size());

    std::vector<std::pair<NodeId, NodeId>> ad;  // (a, d) in a shared class
    for (NodeId a : others) {
      const auto& cls = classes[keys[std::find(others.begin(), others.end(), a) - others.begin()]];
      if (cls.size() < 2) continue;
      ad.push_back({a, cls[0] == a ? cls[1] : cls[0]});
    }
    step["paired"] = ad.size();
    int index_fail = 0, friend_fail = 0;

    for (auto [a, d] : ad) {
      // b's reply to a at t_final depends only on j once a and d are paired.
      std::vector<std::string> reply(t + 1);
      for (int j = 1; j <= t; ++j) {
        Schedule sch = gadget_schedule(g, {{a, j, b}}, Event::edge_ins(a, b));
        auto r = sub_run(*proto, target, sch, members(g, j, {a, b}), {a});
        reply[j] = msg_at(transcript(r, a), b, tf);
      }
      int i = 0, istar = 0;
      for (int x = 1; x <= t && !i; ++x)
        for (int y = x + 1; y <= t; ++y)
          if (reply[x] == reply[y]) {
            i = x;
            istar = y;
            break;
          }
      if (!i) {
        ++index_fail;
        continue;
      }
      // A friend c of b w.r.t. (a, i).
      std::string want = k_key(a, i, b, a);
      std::vector<NodeId> pool;
      for (NodeId v : g.I)
        if (v != a && v != b && v != d) pool.push_back(v);
      std::vector<char> hit(pool.size(), 0);
      parallel_for(static_cast<int>(pool.size()), opt.workers,
                   [&](int k) { hit[k] = k_key(a, i, pool[k], a) == want; });
      auto it = std::find(hit.begin(), hit.end(), 1);
      if (it == hit.end()) {
        ++friend_fail;
        continue;
      }
      CliqueParams p{a, b, pool[it - hit.begin()], d, i, istar};
      ScenarioPair pair;
      pair.label = "clique/S1-S2";
      pair.a = clique_instance(s, t, n, Scenario::S1, p, false).schedule;
      pair.b = clique_instance(s, t, n, Scenario::S2, p, false).schedule;
      pair.witness = a;
      pair.graded_round = tf;
      pair.problem = Problem::MemDetect;
      pair.truth_a = expected_output(pair.a, tf, target, pair.problem, a);
      pair.truth_b = expected_output(pair.b, tf, target, pair.problem, a);
      auto verdict = assert_indistinguishable(pair, *proto, target);
      if (verdict.result == "violation") {
        step["index_fail"] = index_fail;
        step["friend_fail"] = friend_fail;
        rep.details.push_back(step);
        rep.result = "violation";
        rep.pair = {{"scenarios", {"S1", "S2"}}, {"params", params_json(p)}, {"witness", a},
                    {"t_final", tf},         {"verdict", verdict.to_json()}};
        return rep;
      }
    }
    step["index_fail"] = index_fail;
    step["friend_fail"] = friend_fail;
    rep.details.push_back(step);
  }
  return rep;
}

AttackReport attack_detect_clique_mixed(const Protocol& protocol, int s, int cap, int t, int n,
                                        const AttackOptions& opt) {
  Gadget g = make_gadget(s, t, n, true);
  auto proto = truncate(borrow(protocol), cap);
  const Graph target = complete_graph(s);
  const int tf = g.t_final;
  AttackReport rep;
  rep.result = "capacity";
  rep.candidates = static_cast<int>(g.I.size());

  // Color of (x, y): everything exchanged among x, y and K^i in S1(a=x, b=y, i)
  // for every i, keyed by role; plus, per i, the two messages across {x, y}.
  struct Color {
    std::string key;
    std::vector<std::string> across;  // index i-1
  };
  auto color_of = [&](NodeId x, NodeId y) {
    Color c;
    for (int i = 1; i <= t; ++i) {
      Schedule sch = gadget_schedule(g, {{x, i, y}}, Event::edge_ins(x, y));
      auto r = sub_run(*proto, target, sch, members(g, i, {x, y}), {}, true);
      std::vector<NodeId> roles{x, y};
      roles.insert(roles.end(), g.K[i - 1].begin(), g.K[i - 1].end());
      std::set<NodeId> kset(g.K[i - 1].begin(), g.K[i - 1].end());
      c.key += "#" + std::to_string(i) + ":";
      for (std::size_t q = 0; q < roles.size(); ++q) {
        auto it = r.transcripts.find(roles[q]);
        if (it == r.transcripts.end()) continue;
        std::vector<NodeId> from;
        for (NodeId z : roles) from.push_back(kset.count(z) && kset.count(roles[q]) ? -1 : z);
        c.key += "<" + std::to_string(q) + ">" + inbox_key(it->second, from, tf);
      }
      std::string xy = r.transcripts.count(y) ? msg_at(r.transcripts.at(y), x, tf) : "-";
      std::string yx = r.transcripts.count(x) ? msg_at(r.transcripts.at(x), y, tf) : "-";
      c.across.push_back(xy + "/" + yx);
    }
    return c;
  };
  auto index_pair = [&](const Color& c) -> std::optional<std::pair<int, int>> {
    for (int x = 0; x < t; ++x)
      for (int y = x + 1; y < t; ++y)
        if (c.across[x] == c.across[y]) return std::pair{x + 1, y + 1};
    return std::nullopt;
  };

  std::vector<NodeId> pool = g.I;
  std::vector<std::pair<NodeId, std::string>> chosen;
  std::map<std::string, Color> palette;
  std::set<std::string> seen_colors;
  nlohmann::json steps = nlohmann::json::array();

  while (!pool.empty()) {
    NodeId v = pool.front();
    std::vector<NodeId> rest(pool.begin() + 1, pool.end());
    if (rest.empty()) break;
    std::vector<Color> cs(rest.size());
    parallel_for(static_cast<int>(rest.size()), opt.workers, [&](int k) { cs[k] = color_of(v, rest[k]); });
    std::map<std::string, int> count;
    std::string best;
    for (const auto& c : cs) {
      seen_colors.insert(c.key);
      if (++count[c.key] > count[best] || best.empty()) best = c.key;
    }
    // First color in candidate order with the top count, for determinism.
    int top = count[best];
    for (const auto& c : cs)
      if (count[c.key] == top) {
        best = c.key;
        palette[best] = c;
        break;
      }
    std::vector<NodeId> next;
    for (std::size_t k = 0; k < rest.size(); ++k)
      if (cs[k].key == best) next.push_back(rest[k]);
    chosen.push_back({v, best});
    steps.push_back({{"v", v}, {"colors", count.size()}, {"kept", next.size()}});
    pool = std::move(next);

    // A color that collides across i and has been picked three times.
    std::vector<NodeId> same;
    for (const auto& [x, c] : chosen)
      if (c == best) same.push_back(x);
    auto ip = index_pair(palette[best]);
    if (same.size() < 3 || !ip || pool.empty()) continue;

    CliqueParams p{same[0], pool.front(), same[1], same[2], ip->first, ip->second};
    std::map<Scenario, CliqueInstance> inst;
    std::map<Scenario, RunReport> runs;
    std::set<NodeId> watch{p.a, p.b};
    watch.insert(g.K[p.i - 1].begin(), g.K[p.i - 1].end());
    for (Scenario sc : {Scenario::S1, Scenario::S2, Scenario::S3, Scenario::S4}) {
      inst.emplace(sc, clique_instance(s, t, n, sc, p, true));
      RunOptions o;
      o.watch = watch;
      runs.emplace(sc, run(*proto, target, inst.at(sc).schedule, o));
    }
    auto same_view = [&](Scenario x, NodeId w) {
      return transcripts_match(transcript(runs.at(Scenario::S1), w), transcript(runs.at(x), w), tf);
    };
    bool claim_a = same_view(Scenario::S2, p.a);
    bool claim_b = same_view(Scenario::S3, p.b);
    bool claim_k = true;
    for (NodeId y : g.K[p.i - 1]) claim_k = claim_k && same_view(Scenario::S4, y);
    nlohmann::json failing = nlohmann::json::array();
    for (auto& [sc, r] : runs)
      if (!r.verdict.pass) failing.push_back(scenario_name(sc));
    nlohmann::json check{{"params", params_json(p)},
                         {"claims", {{"a_S1_S2", claim_a}, {"b_S1_S3", claim_b}, {"K_S1_S4", claim_k}}},
                         {"failing", failing}};
    steps.push_back({{"attempt", check}});
    if (!(claim_a && claim_b && claim_k) || failing.empty()) continue;

    // Who claims the clique in S1 decides which branch must break.
    Problem prob = proto->problem();
    const auto& r1 = runs.at(Scenario::S1);
    Scenario other = Scenario::S2;
    NodeId w = p.a;
    if (says_yes(output_at(r1, tf, p.a, prob))) {
    } else if (says_yes(output_at(r1, tf, p.b, prob))) {
      other = Scenario::S3;
      w = p.b;
    } else {
      for (NodeId y : g.K[p.i - 1])
        if (says_yes(output_at(r1, tf, y, prob))) {
          other = Scenario::S4;
          w = y;
          break;
        }
    }
    ScenarioPair pair;
    pair.label = "clique/S1-" + scenario_name(other);
    pair.a = inst.at(Scenario::S1).schedule;
    pair.b = inst.at(other).schedule;
    pair.witness = w;
    pair.graded_round = tf;
    pair.problem = prob;
    pair.truth_a = expected_output(pair.a, tf, target, prob, w);
    pair.truth_b = expected_output(pair.b, tf, target, prob, w);
    auto verdict = assert_indistinguishable(pair, *proto, target);
    if (verdict.result != "violation") continue;
    rep.result = "violation";
    rep.classes = static_cast<int>(seen_colors.size());
    rep.pair = {{"scenarios", {"S1", scenario_name(other)}},
                {"params", params_json(p)},
                {"witness", w},
                {"t_final", tf},
                {"claims", check["claims"]},
                {"failing", failing},
                {"verdict", verdict.to_json()}};
    rep.details = steps;
    return rep;
  }
  rep.classes = static_cast<int>(seen_colors.size());
  rep.details = steps;
  return rep;
}

// ---------------------------------------------------------------------------
// Bandwidth lower-bound instances

long long receive_slots(const Schedule& s, NodeId v, int from, int to) {
  Graph g = s.initial;
  long long total = 0;
  for (int round = 1; round <= to && round <= static_cast<int>(s.events.size()); ++round) {
    apply_event(g, s.events[round - 1]);
    if (round >= from && g.has_node(v)) total += g.degree(v);
  }
  return total;
}

long long staggered_slots(int d, int r) { return static_cast<long long>(r) * d * (d + 1) / 2; }

LbInstance memlist_lb_instance(const Graph& h, int n, const std::string& variant, const std::vector<int>& choice, int r) {
  bool node_model = variant.rfind("node_ins", 0) == 0;
  bool nonclique = variant.size() >= 9 && variant.substr(variant.size() - 9) == "nonclique";
  if (!(variant == "edge_ins_nonclique" || variant == "edge_ins_nonmultipartite" || variant == "node_ins_nonclique" ||
        variant == "node_ins_nonmultipartite"))
    throw std::invalid_argument("memlist_lb_instance: unknown variant " + variant);
  if (n < 1 || r < 1) throw std::invalid_argument("memlist_lb_instance: n and r must be positive");

  // Special nodes of h.
  NodeId u = 0, v = 0, w = 0;
  auto hn = h.nodes();
  if (nonclique) {
    for (NodeId x : hn)
      for (NodeId y : hn)
        if (!u && x < y && !h.has_edge(x, y)) {
          u = x;
          v = y;
        }
    if (!u) throw std::invalid_argument("memlist_lb_instance: target is a clique");
  } else {
    for (NodeId x : hn)
      for (auto [p, q] : h.edges())
        if (!v && x != p && x != q && !h.has_edge(x, p) && !h.has_edge(x, q)) {
          v = x;
          u = p;
          w = q;
        }
    if (!v) throw std::invalid_argument("memlist_lb_instance: target is complete multipartite");
  }
  const int blocks = nonclique ? 1 : 2;
  const long long universe = nonclique ? n : static_cast<long long>(n) * n;
  std::set<int> picked(choice.begin(), choice.end());
  if (picked.size() != choice.size()) throw std::invalid_argument("memlist_lb_instance: repeated choice");
  for (int c : picked)
    if (c < 0 || c >= universe) throw std::invalid_argument("memlist_lb_instance: choice out of range");

  Relabel L;
  for (NodeId x : hn)
    if (x != u && x != v && x != w) L.take(x);
  NodeId vid = L.take(v);
  NodeId ubase = L.next, wbase = L.next + n;
  int total = L.next - 1 + blocks * n;
  auto uid = [&](int i) { return ubase + i; };
  auto wid = [&](int j) { return wbase + j; };
  auto mapped = [&](NodeId x) { return L.id.at(x); };

  LbInstance out;
  Schedule& s = out.schedule;
  s.r = r;
  s.model = {node_model ? ChangeType::NodeIns : ChangeType::EdgeIns};
  s.initial = Graph::with_absent(total);
  for (auto [x, id] : L.id)
    if (x != v) s.initial.add_node(id);
  for (auto [x, y] : h.edges())
    if (L.id.count(x) && L.id.count(y) && x != v && y != v) s.initial.add_edge(mapped(x), mapped(y));
  if (!node_model) {
    s.initial.add_node(vid);
    for (int i = 0; i < blocks * n; ++i) s.initial.add_node(ubase + i);
  }
  std::set<NodeId> skip{u, v, w};
  auto core = [&](NodeId x) {
    std::vector<NodeId> out;
    for (NodeId y : nbrs_except(h, x, skip)) out.push_back(mapped(y));
    return out;
  };
  auto attach = [&](NodeId id, const std::vector<NodeId>& to) {
    if (node_model) {
      s.change(Event::node_ins(id, to));
    } else {
      for (NodeId y : to) s.change(Event::edge_ins(id, y));
    }
  };

  std::map<NodeId, NodeId> m;
  for (auto [x, id] : L.id) m[x] = id;
  if (nonclique) {
    for (int i : picked) attach(uid(i), core(u));
    for (int i : picked) {
      m[u] = uid(i);
      out.required.insert(map_copy(h, m));
    }
    out.choice_count = binomial(n, static_cast<int>(picked.size()));
  } else {
    std::map<int, std::vector<NodeId>> partners;  // w_j -> chosen u_i
    for (int c : picked) partners[c % n].push_back(uid(c / n));
    if (node_model) {
      for (int i = 0; i < n; ++i) attach(uid(i), core(u));
      for (int j = 0; j < n; ++j) {
        auto to = core(w);
        for (NodeId x : partners[j]) to.push_back(x);
        attach(wid(j), to);
      }
    } else {
      for (int i = 0; i < n; ++i) attach(uid(i), core(u));
      for (int j = 0; j < n; ++j) attach(wid(j), core(w));
      for (int c : picked) s.change(Event::edge_ins(uid(c / n), wid(c % n)));
    }
    for (int c : picked) {
      m[u] = uid(c / n);
      m[w] = wid(c % n);
      out.required.insert(map_copy(h, m));
    }
    out.choice_count = binomial(n * n, static_cast<int>(picked.size()));
  }
  int first_v = static_cast<int>(s.events.size()) + 1;
  attach(vid, core(v));
  out.witness = vid;
  out.graded_round = static_cast<int>(s.events.size());
  out.receive_slots = receive_slots(s, vid, first_v, out.graded_round);
  out.roles = {{"u", u}, {"v", v}, {"v_id", vid}, {"U_first", ubase}};
  if (!nonclique) out.roles["w"] = w, out.roles["W_first"] = wbase;
  return out;
}

LbInstance memlist_del_lb_instance(const Graph& h, int n, int deleted, ChangeType model, int r) {
  if (model != ChangeType::EdgeDel && model != ChangeType::NodeDel)
    throw std::invalid_argument("memlist_del_lb_instance: deletion model only");
  if (deleted < 0 || deleted >= n) throw std::invalid_argument("memlist_del_lb_instance: index out of range");
  NodeId u = 0, v = 0;
  auto hn = h.nodes();
  for (NodeId x : hn)
    for (NodeId y : hn)
      if (!u && x < y && !h.has_edge(x, y)) {
        u = x;
        v = y;
      }
  if (!u) throw std::invalid_argument("memlist_del_lb_instance: target is a clique");
  Relabel L;
  for (NodeId x : hn)
    if (x != u) L.take(x);
  NodeId ubase = L.next;
  Graph g0 = Graph::with_absent(L.next - 1 + n);
  for (auto [x, id] : L.id) g0.add_node(id);
  for (int i = 0; i < n; ++i) g0.add_node(ubase + i);
  for (auto [x, y] : h.edges()) {
    if (x != u && y != u) {
      g0.add_edge(L.id.at(x), L.id.at(y));
    } else {
      NodeId other = x == u ? y : x;
      for (int i = 0; i < n; ++i) g0.add_edge(ubase + i, L.id.at(other));
    }
  }
  LbInstance out;
  NodeId ui = ubase + deleted;
  NodeId first_nb = L.id.at(h.neighbors(u).front());
  Event e = model == ChangeType::EdgeDel ? Event::edge_del(ui, first_nb) : Event::node_del(ui);
  out.schedule = one_change(g0, model, e, r);
  out.witness = L.id.at(v);
  out.graded_round = r;
  std::map<NodeId, NodeId> m(L.id.begin(), L.id.end());
  for (int i = 0; i < n; ++i)
    if (i != deleted) {
      m[u] = ubase + i;
      out.required.insert(map_copy(h, m));
    }
  out.choice_count = n;
  out.receive_slots = receive_slots(out.schedule, out.witness, 1, r);
  out.roles = {{"u", u}, {"v", v}, {"v_id", out.witness}, {"U_first", ubase}, {"deleted", ui}};
  return out;
}

LbInstance memdetect_lb_instance(const Graph& h, int n, const std::vector<int>& chosen, int j, ChangeType model) {
  if (model != ChangeType::EdgeIns && model != ChangeType::NodeIns)
    throw std::invalid_argument("memdetect_lb_instance: insertion model only");
  GraphParams P = params(h);
  if (!P.is_complete_multipartite) throw std::invalid_argument("memdetect_lb_instance: target is not complete multipartite");
  if (P.is_clique || P.is_star) throw std::invalid_argument("memdetect_lb_instance: target is a clique or a star");
  if (n < 2 || n % 2) throw std::invalid_argument("memdetect_lb_instance: n must be even");
  std::set<int> picked(chosen.begin(), chosen.end());
  if (static_cast<int>(picked.size()) != n / 2 || picked.size() != chosen.size())
    throw std::invalid_argument("memdetect_lb_instance: U' must hold exactly n/2 distinct indices");
  for (int c : picked)
    if (c < 0 || c >= n) throw std::invalid_argument("memdetect_lb_instance: index out of range");
  if (j < 0 || j >= n) throw std::invalid_argument("memdetect_lb_instance: u_j out of range");

  // Largest part S (first among equals); u, v its two smallest nodes; w the
  // smallest neighbor of u.
  const Parts& parts = *P.parts;
  const std::vector<NodeId>* S = &parts.front();
  for (const auto& part : parts)
    if (part.size() > S->size()) S = &part;
  std::vector<NodeId> Ss = *S;
  std::sort(Ss.begin(), Ss.end());
  NodeId u = Ss[0], v = Ss[1], w = h.neighbors(u).front();

  Relabel L;
  for (NodeId x : h.nodes())
    if (x != u && x != v && x != w) L.take(x);
  NodeId vid = L.take(v), wid = L.take(w);
  NodeId ubase = L.next;
  auto uid = [&](int i) { return ubase + i; };
  bool node_model = model == ChangeType::NodeIns;

  LbInstance out;
  Schedule& s = out.schedule;
  s.r = 1;
  s.model = {model};
  s.initial = Graph::with_absent(L.next - 1 + n);
  for (auto [x, id] : L.id)
    if (x != v && x != w) s.initial.add_node(id);
  for (auto [x, y] : h.edges())
    if (x != u && x != v && x != w && y != u && y != v && y != w) s.initial.add_edge(L.id.at(x), L.id.at(y));
  if (!node_model) {
    s.initial.add_node(vid);
    s.initial.add_node(wid);
    for (int i = 0; i < n; ++i) s.initial.add_node(uid(i));
  }
  auto core = [&](NodeId x, std::set<NodeId> skip) {
    std::vector<NodeId> o;
    for (NodeId y : nbrs_except(h, x, skip)) o.push_back(L.id.at(y));
    return o;
  };
  int v_from = 0, w_from = 0, w_to = 0;
  if (node_model) {
    for (int i = 0; i < n; ++i) s.change(Event::node_ins(uid(i), picked.count(i) ? core(u, {w}) : std::vector<NodeId>{}));
    v_from = static_cast<int>(s.events.size()) + 1;
    s.change(Event::node_ins(vid, core(v, {w})));
    auto to = core(w, {u});
    to.push_back(uid(j));
    s.change(Event::node_ins(wid, to));
  } else {
    for (int i : picked)
      for (NodeId y : core(u, {w})) s.change(Event::edge_ins(uid(i), y));
    v_from = static_cast<int>(s.events.size()) + 1;
    for (NodeId y : core(v, {w})) s.change(Event::edge_ins(vid, y));
    w_from = static_cast<int>(s.events.size()) + 1;
    for (NodeId y : core(w, {u})) s.change(Event::edge_ins(wid, y));
    w_to = static_cast<int>(s.events.size());
    s.change(Event::edge_ins(wid, uid(j)));
  }
  out.witness = vid;
  out.graded_round = static_cast<int>(s.events.size());
  out.expected = picked.count(j) > 0;
  if (*out.expected) {
    std::map<NodeId, NodeId> m(L.id.begin(), L.id.end());
    m[u] = uid(j);
    out.required.insert(map_copy(h, m));
  }
  out.choice_count = binomial(n, n / 2);
  // v's slots from its first edge on, minus w's final message, plus what w
  // heard before the last step.
  out.receive_slots = receive_slots(s, vid, v_from, out.graded_round) - 1 +
                      (w_from ? receive_slots(s, wid, w_from, w_to) : 0);
  out.roles = {{"u", u}, {"v", v}, {"w", w}, {"v_id", vid}, {"w_id", wid}, {"U_first", ubase}, {"u_j", uid(j)}};
  return out;
}

// ---------------------------------------------------------------------------
// Listing blow-ups

BlowupFamily listing_lb_blowup(const Graph& h, int n, ChangeType model) {
  GraphParams P = params(h);
  if (n < 1) throw std::invalid_argument("listing_lb_blowup: n must be positive");
  BlowupFamily f;
  f.h = h;
  f.model = model;
  f.n = n;
  auto hn = h.nodes();
  std::vector<int> sizes(h.id_range(), 1);
  if (model == ChangeType::EdgeDel) {
    if (P.ne_rad != 2 || P.rad != 2) throw std::invalid_argument("listing_lb_blowup: edge deletions need ne_rad = rad = 2");
    for (NodeId x : hn) sizes[x - 1] = n;
  } else if (model == ChangeType::NodeDel) {
    if (P.rad != 2 || P.diam < 3) throw std::invalid_argument("listing_lb_blowup: node deletions need rad = 2, diam >= 3");
    NodeId v = 0, w = 0;
    for (NodeId x : hn)
      for (NodeId y : hn)
        if (!v && x < y && distance(h, x, y) >= 3) {
          v = x;
          w = y;
        }
    sizes[v - 1] = sizes[w - 1] = n;
  } else {
    throw std::invalid_argument("listing_lb_blowup: deletion model only");
  }
  f.initial = blow_up(h, sizes);
  NodeId next = 1;
  f.blocks.resize(h.id_range());
  for (NodeId x = 1; x <= h.id_range(); ++x)
    for (int k = 0; k < sizes[x - 1]; ++k) f.blocks[x - 1].push_back(next++);
  // Every choice of one representative per block.
  std::vector<int> pick(hn.size(), 0);
  while (true) {
    std::map<NodeId, NodeId> m;
    for (std::size_t k = 0; k < hn.size(); ++k) m[hn[k]] = f.blocks[hn[k] - 1][pick[k]];
    f.designated.insert(map_copy(h, m));
    std::size_t k = 0;
    while (k < hn.size() && ++pick[k] == static_cast<int>(f.blocks[hn[k] - 1].size())) pick[k++] = 0;
    if (k == hn.size()) break;
  }
  return f;
}

nlohmann::json ProbeReport::to_json() const {
  return {{"listener", listener}, {"listed", listed},       {"candidates", candidates}, {"required_bits", required_bits},
          {"deletion", dynsub::to_json(deletion)}, {"pass", pass}, {"max_bits", max_bits}};
}

ProbeReport probe(const BlowupFamily& f, const Protocol& protocol) {
  const Graph& h = f.h;
  Schedule quiet;
  quiet.initial = f.initial;
  quiet.r = 1;
  quiet.model = {f.model};
  quiet.push(Event::quiet());
  RunOptions o;
  o.enforce_model = false;
  auto rep0 = run(protocol, h, quiet, o);

  // The node holding the most designated copies.
  ProbeReport pr;
  std::map<NodeId, std::vector<Copy>> held;
  for (const auto& [v, out] : rep0.rounds.front().outputs)
    if (auto cs = std::get_if<CopySet>(&out))
      for (const auto& c : *cs)
        if (f.designated.count(c)) held[v].push_back(c);
  for (const auto& [v, cs] : held)
    if (static_cast<int>(cs.size()) > pr.listed) {
      pr.listener = v;
      pr.listed = static_cast<int>(cs.size());
    }
  if (!pr.listener) {
    pr.pass = false;
    return pr;
  }
  std::map<NodeId, NodeId> block_of;
  for (NodeId x = 1; x <= h.id_range(); ++x)
    for (NodeId y : f.blocks[x - 1]) block_of[y] = x;
  auto rep_of = [&](const Copy& c, NodeId x) {  // representative of block x in c
    for (NodeId y : copy_nodes(c))
      if (block_of.at(y) == x) return y;
    return NodeId{0};
  };
  NodeId x = block_of.at(pr.listener);
  const auto& mine = held[pr.listener];

  if (f.model == ChangeType::EdgeDel) {
    // A path x - p - q in h with x, q non-adjacent.
    NodeId p = 0, q = 0;
    for (NodeId a : h.neighbors(x))
      for (NodeId b : h.neighbors(a))
        if (!p && b != x && !h.has_edge(x, b)) {
          p = a;
          q = b;
        }
    // Largest group of held copies agreeing outside blocks x and q.
    std::map<std::vector<NodeId>, std::vector<const Copy*>> groups;
    for (const auto& c : mine) {
      std::vector<NodeId> sig;
      for (NodeId y : h.nodes())
        if (y != x && y != q) sig.push_back(rep_of(c, y));
      groups[sig].push_back(&c);
    }
    const std::vector<const Copy*>* best = nullptr;
    for (const auto& [sig, cs] : groups)
      if (!best || cs.size() > best->size()) best = &cs;
    std::set<NodeId> xs, qs;
    for (const Copy* c : *best) {
      NodeId rx = rep_of(*c, x);
      if (rx != pr.listener) xs.insert(rx);
      qs.insert(rep_of(*c, q));
    }
    NodeId mid = rep_of(*best->front(), p);
    if (xs.size() >= qs.size()) {
      pr.candidates = static_cast<int>(xs.size());
      pr.deletion = xs.empty() ? Event::quiet() : Event::edge_del(*xs.begin(), mid);
    } else {
      pr.candidates = static_cast<int>(qs.size());
      pr.deletion = Event::edge_del(mid, *qs.begin());
    }
  } else {
    // The blown-up pair; the listener sits at distance 2 from one of them.
    std::vector<NodeId> big;
    for (NodeId y = 1; y <= h.id_range(); ++y)
      if (f.blocks[y - 1].size() > 1) big.push_back(y);
    NodeId far = big[0], fixed = big[1];
    if (h.has_edge(x, far) || x == far) std::swap(far, fixed);
    std::map<NodeId, std::set<NodeId>> by_fixed;
    for (const auto& c : mine) by_fixed[rep_of(c, fixed)].insert(rep_of(c, far));
    const std::set<NodeId>* best = nullptr;
    for (const auto& [k, s] : by_fixed)
      if (!best || s.size() > best->size()) best = &s;
    pr.candidates = static_cast<int>(best->size());
    pr.deletion = Event::node_del(*best->begin());
  }
  pr.required_bits = ceil_log2(static_cast<std::uint64_t>(std::max(pr.candidates, 1)));

  Schedule s = quiet;
  s.push(pr.deletion);
  RunOptions go;
  go.enforce_model = false;
  auto rep = run(protocol, h, s, go);
  pr.pass = rep.verdict.pass;
  pr.max_bits = rep.max_bits;
  return pr;
}

// ---------------------------------------------------------------------------
// Counting

int ceil_log2_big(const BigInt& v) {
  if (v <= 1) return 0;
  int m = static_cast<int>(boost::multiprecision::msb(v));
  return (v & (v - 1)) == 0 ? m : m + 1;
}

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

CapacityAudit capacity_audit(const BigInt& choice_count, long long x, int B) {
  CapacityAudit a;
  a.choice_count = choice_count;
  a.x = x;
  a.B = B;
  a.bits_needed = ceil_log2_big(choice_count);
  a.satisfied = static_cast<BigInt>(x) * B >= a.bits_needed;
  return a;
}

int min_bandwidth(const BigInt& choice_count, long long x) {
  int need = ceil_log2_big(choice_count);
  if (need == 0) return 0;
  if (x <= 0) throw std::invalid_argument("min_bandwidth: no receive slots");
  return static_cast<int>((need + x - 1) / x);
}

nlohmann::json CapacityAudit::to_json() const {
  return {{"choice_count", choice_count.str()}, {"x", x},   {"B", B},
          {"bits_needed", bits_needed},        {"xB", x * B}, {"satisfied", satisfied}};
}

}  // namespace dynsub
