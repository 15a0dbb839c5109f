#include <doctest.h>

#include <random>

#include "dynsub/adversary.hpp"
#include "dynsub/schedule_gen.hpp"
#include "dynsub/sim.hpp"
#include "support.hpp"

using namespace dynsub;

namespace {

// Sends a 16-bit digest of everything it has seen. Any change reaches a node
// at distance k from it after exactly k more rounds.
class GossipNode : public NodeState {
 public:
  explicit GossipNode(NodeId self) : h_(static_cast<std::uint64_t>(self) * 0x9E3779B97F4A7C15ull) {}
  Outbox send(const NodeView& v, int) override {
    for (NodeId w : v.cur_neighbors) mix(w);
    Outbox out;
    BitString b;
    b.append(h_ & 0xFFFF, 16);
    for (NodeId w : v.cur_neighbors) out[w] = b;
    return out;
  }
  Output receive(const NodeView& v, int) override {
    for (const auto& [w, m] : *v.inbox) {
      mix(w);
      BitReader r(m);
      mix(r.read(16));
    }
    return false;
  }

 private:
  void mix(std::uint64_t x) { h_ = (h_ ^ x) * 0x100000001B3ull + 7; }
  std::uint64_t h_;
};

class Gossip : public Protocol {
 public:
  Gossip() = default;
  explicit Gossip(ChangeModel m) : model_(std::move(m)) {}
  std::string name() const override { return "gossip"; }
  Problem problem() const override { return Problem::MemDetect; }
  ChangeModel supports() const override { return model_; }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph>) const override {
    return std::make_unique<GossipNode>(self);
  }
  std::unique_ptr<NodeState> init_inserted(NodeId self, int, const std::vector<NodeId>&, std::shared_ptr<const Graph>,
                                           int) const override {
    return std::make_unique<GossipNode>(self);
  }

 private:
  ChangeModel model_{ChangeType::EdgeIns, ChangeType::EdgeDel, ChangeType::NodeIns, ChangeType::NodeDel};
};

Schedule edge_ins_schedule(Graph g0, int r) {
  Schedule s;
  s.initial = std::move(g0);
  s.r = r;
  s.model = {ChangeType::EdgeIns};
  return s;
}

}  // namespace

TEST_CASE("validate: back-to-back changes with r=2") {
  Schedule s = edge_ins_schedule(Graph(4), 2);
  s.push(Event::edge_ins(1, 2)).push(Event::edge_ins(2, 3)).pad(1);
  auto vs = validate(s);
  REQUIRE(!vs.empty());
  CHECK(vs.front().index == 1);
  CHECK(vs.front().message.find("missing quiet round") != std::string::npos);
}

TEST_CASE("validate: deleting a non-edge") {
  Schedule s;
  s.initial = Graph(4);
  s.model = {ChangeType::EdgeDel};
  s.push(Event::edge_del(1, 2));
  CHECK(!validate(s).empty());
}

TEST_CASE("validate: change outside the model and degree bound") {
  Schedule s = edge_ins_schedule(Graph(4), 1);
  s.push(Event::node_del(1));
  CHECK(!validate(s).empty());
  Schedule t = edge_ins_schedule(Graph(4), 1);
  t.delta = 1;
  t.push(Event::edge_ins(1, 2)).push(Event::edge_ins(1, 3));
  auto vs = validate(t);
  REQUIRE(vs.size() == 1);
  CHECK(vs.front().index == 1);
}

TEST_CASE("generated schedules validate") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GenConfig cfg;
    cfg.n = 64;
    cfg.delta = 4;
    cfg.events = 150;
    cfg.r = 1 + static_cast<int>(seed % 3);
    cfg.seed = seed;
    cfg.mix = parse_mix(seed % 2 ? "edge_ins" : "edge_ins:2,node_ins:1,edge_del:1,node_del:1");
    if (seed % 2 == 0) cfg.n0 = 32;
    Schedule s = random_schedule(cfg);
    CHECK(validate(s).empty());
    int changes = 0;
    for (const auto& e : s.events) changes += !e.is_quiet();
    CHECK(s.events.size() >= 150u);
    // Insertion-only runs saturate near n*delta/2 = 128 edges.
    if (seed % 2) {
      CHECK(changes <= 128);
      CHECK(changes >= 120);
    } else {
      CHECK(changes == 150);
    }
  }
}

TEST_CASE("silent protocol with the target already present passes") {
  Schedule s = edge_ins_schedule(complete_graph(3), 1);
  auto rep = run(*silence_protocol(complete_graph(3), Problem::MemList), complete_graph(3), s);
  CHECK(rep.verdict.pass);
  CHECK(rep.max_bits == 0);
}

TEST_CASE("silent protocol misses a triangle closed by an insertion") {
  Schedule s = edge_ins_schedule(Graph::from_edges(3, {{1, 2}, {2, 3}}), 1);
  s.push(Event::edge_ins(1, 3));
  auto rep = run(*silence_protocol(complete_graph(3), Problem::MemList), complete_graph(3), s);
  CHECK_FALSE(rep.verdict.pass);
  CHECK(rep.verdict.round == 1);
  CHECK(rep.verdict.kind == "missed_copy");
}

TEST_CASE("grade examples") {
  Graph k3 = complete_graph(3);
  Copy tri = ref::canon({{1, 2}, {2, 3}, {1, 3}});
  std::map<NodeId, Output> all;
  for (NodeId v = 1; v <= 3; ++v) all[v] = CopySet{tri};
  CHECK(grade(Problem::MemList, k3, k3, all).empty());

  std::map<NodeId, Output> phantom;
  for (NodeId v = 1; v <= 5; ++v) phantom[v] = CopySet{};
  phantom[2] = CopySet{tri};
  auto fs = grade(Problem::List, k3, cycle_graph(5), phantom);
  REQUIRE(!fs.empty());
  CHECK(fs.front().kind == "false_listing");

  std::map<NodeId, Output> yes;
  for (NodeId v = 1; v <= 5; ++v) yes[v] = v == 4;
  CHECK(!grade(Problem::Detect, k3, cycle_graph(5), yes).empty());

  std::map<NodeId, Output> no;
  for (NodeId v = 1; v <= 4; ++v) no[v] = false;
  auto nf = grade(Problem::Detect, k3, complete_graph(4), no);
  REQUIRE(nf.size() == 1);
  CHECK(nf.front().kind == "no_yes");

  // MemDetect: exact per-node bit.
  Graph paw = paw_graph();
  std::map<NodeId, Output> md{{1, true}, {2, true}, {3, true}, {4, false}};
  CHECK(grade(Problem::MemDetect, k3, paw, md).empty());
  md[4] = true;
  CHECK(grade(Problem::MemDetect, k3, paw, md).size() == 1);
}

TEST_CASE("grading happens only at the end of each r-round window") {
  Schedule s = edge_ins_schedule(Graph(4), 3);
  s.change(Event::edge_ins(1, 2)).change(Event::edge_ins(2, 3));
  auto rep = run(*silence_protocol(complete_graph(3), Problem::MemList), complete_graph(3), s);
  std::vector<bool> graded;
  for (const auto& r : rep.rounds) graded.push_back(r.graded);
  CHECK(graded == std::vector<bool>{false, false, true, false, false, true});
}

TEST_CASE("causality: far changes stay invisible for distance-1 rounds") {
  // Path 1-...-8; branch a deletes {7,8} in round 1. Node 1 is 6 hops from 7.
  Schedule a;
  a.initial = path_graph(8);
  a.model = {ChangeType::EdgeDel};
  a.push(Event::edge_del(7, 8)).pad(8);
  Schedule b = a;
  b.events[0] = Event::quiet();
  RunOptions o;
  o.watch = {1};
  o.grade = false;
  Gossip p;
  auto ta = transcript(run(p, complete_graph(3), a, o), 1);
  auto tb = transcript(run(p, complete_graph(3), b, o), 1);
  REQUIRE(ta.size() == 9);
  for (int k = 0; k < 5; ++k) CHECK(ta[k] == tb[k]);
  CHECK(ta[5] != tb[5]);
}

TEST_CASE("isolated node sees only empty inboxes") {
  Schedule s = edge_ins_schedule(Graph(5), 1);
  s.push(Event::edge_ins(1, 2)).push(Event::edge_ins(2, 3)).pad(3);
  RunOptions o;
  o.watch = {5};
  o.grade = false;
  auto tr = transcript(run(Gossip{}, complete_graph(3), s, o), 5);
  REQUIRE(tr.size() == 5);
  for (const auto& e : tr) {
    CHECK(e.inbox.empty());
    CHECK(e.neighbors.empty());
  }
}

TEST_CASE("watched absent nodes get empty entries") {
  Schedule s;
  s.initial = Graph::with_absent(3);
  s.initial.add_node(1);
  s.initial.add_node(2);
  s.initial.add_edge(1, 2);
  s.model = {ChangeType::NodeIns};
  s.pad(1).push(Event::node_ins(3, {1, 2})).pad(1);
  RunOptions o;
  o.watch = {3};
  o.grade = false;
  auto tr = transcript(run(Gossip{}, complete_graph(3), s, o), 3);
  REQUIRE(tr.size() == 3);
  CHECK(tr[0].neighbors.empty());
  CHECK(tr[1].neighbors == std::vector<NodeId>{1, 2});
  CHECK(tr[1].inbox.size() == 2);  // edges inserted this round deliver this round
}

TEST_CASE("runs are deterministic") {
  GenConfig cfg;
  cfg.n = 32;
  cfg.events = 60;
  cfg.seed = 9;
  cfg.mix = parse_mix("edge_ins:2,edge_del:1");
  Schedule s = random_schedule(cfg);
  RunOptions o;
  o.record_all_transcripts = true;
  o.grade = false;
  auto a = run(Gossip{}, complete_graph(3), s, o);
  auto b = run(Gossip{}, complete_graph(3), s, o);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(a.transcripts == b.transcripts);
}

TEST_CASE("schedule JSON round trip") {
  GenConfig cfg;
  cfg.n = 20;
  cfg.n0 = 12;
  cfg.events = 40;
  cfg.r = 2;
  cfg.seed = 3;
  cfg.mix = parse_mix("edge_ins:1,node_ins:1,node_del:1,edge_del:1");
  Schedule s = random_schedule(cfg);
  Schedule t = schedule_from_json(to_json(s));
  CHECK(t.initial == s.initial);
  CHECK(t.events == s.events);
  CHECK(t.r == s.r);
  CHECK(t.model == s.model);
  CHECK(t.delta == s.delta);
  CHECK(to_json(t) == to_json(s));
}

TEST_CASE("bandwidth cap aborts with a cap violation") {
  Schedule s = edge_ins_schedule(path_graph(3), 1);
  s.pad(2);
  RunOptions o;
  o.bandwidth_cap = 8;
  auto rep = run(Gossip{}, complete_graph(3), s, o);
  CHECK_FALSE(rep.verdict.pass);
  CHECK(rep.verdict.kind == "cap_violation");
  CHECK(rep.rounds_run == 1);
}

TEST_CASE("stepping a closed subset") {
  Schedule s = edge_ins_schedule(Graph::from_edges(6, {{1, 2}, {4, 5}}), 1);
  s.push(Event::edge_ins(2, 3)).pad(1);
  RunOptions o;
  o.only = std::set<NodeId>{1, 2, 3};
  o.watch = {1};
  auto rep = run(Gossip{}, complete_graph(3), s, o);
  for (const auto& r : rep.rounds) CHECK_FALSE(r.graded);
  RunOptions full;
  full.watch = {1};
  full.grade = false;
  CHECK(transcript(rep, 1) == transcript(run(Gossip{}, complete_graph(3), s, full), 1));

  Schedule bad = edge_ins_schedule(Graph(6), 1);
  bad.push(Event::edge_ins(3, 4));
  CHECK_THROWS_AS(run(Gossip{}, complete_graph(3), bad, o), SimError);
}

TEST_CASE("engine refuses unsupported change types and bad schedules") {
  Schedule s = edge_ins_schedule(path_graph(3), 1);
  s.model = {ChangeType::EdgeDel};
  s.push(Event::edge_del(1, 2));
  CHECK_THROWS_AS(run(Gossip({ChangeType::EdgeIns}), complete_graph(3), s), SimError);
  Schedule t = edge_ins_schedule(path_graph(3), 1);
  t.push(Event::edge_ins(1, 2));
  CHECK_THROWS_AS(run(Gossip{}, complete_graph(3), t), SimError);
}
