#include <doctest.h>

#include <random>

#include "dynsub/general.hpp"
#include "dynsub/schedule_gen.hpp"
#include "support.hpp"

using namespace dynsub;

namespace {

Schedule gen(const Graph& g0, const std::string& mix, int r, int events, std::uint64_t seed, int max_gap = 1) {
  GenConfig cfg;
  cfg.n = g0.id_range();
  cfg.delta = std::max(4, g0.max_degree());
  cfg.r = r;
  cfg.events = events;
  cfg.mix = parse_mix(mix);
  cfg.max_gap = max_gap;
  cfg.close_bias = 0.6;
  cfg.seed = seed;
  return random_schedule(cfg, g0);
}

// Random host on 1..n with a few absent IDs reserved for node insertions.
Graph host(int n, int absent, double p, std::mt19937_64& rng) {
  Graph g = ref::random_graph(n, p, rng);
  for (NodeId v = n - absent + 1; v <= n; ++v) g.remove_node(v);
  return g;
}

const CopySet* listed(const RoundRecord& r, NodeId v) {
  auto it = r.outputs.find(v);
  return it == r.outputs.end() ? nullptr : &std::get<CopySet>(it->second);
}

// Under deletions only, nobody ever adds a copy.
void check_shrinking(const RunReport& rep) {
  std::map<NodeId, CopySet> last;
  bool first = true;
  for (const auto& r : rep.rounds) {
    std::map<NodeId, CopySet> now;
    for (const auto& [v, o] : r.outputs)
      if (auto* cs = std::get_if<CopySet>(&o)) now[v] = *cs;
    if (!first)
      for (const auto& [v, cs] : now) {
        const CopySet& before = last[v];
        CHECK(std::includes(before.begin(), before.end(), cs.begin(), cs.end()));
      }
    last = std::move(now);
    first = false;
  }
}

int div_ceil(int a, int b) { return (a + b - 1) / b; }

}  // namespace

TEST_CASE("payload and header sizes") {
  CHECK(view_payload_bits(32, 1, true) == 32);
  CHECK(view_payload_bits(32, 2, false) == 31 + 30 * 31 / 2);
  CHECK(view_payload_bits(32, 3, false) == 31 + 2 * (30 * 31 / 2));
  CHECK(flood_header_bits(1, 1) == 0);
  CHECK(flood_header_bits(2, 2) == 1);
  CHECK(flood_header_bits(2, 8) == 1 + 2);
}

TEST_CASE("constructor guards") {
  CHECK_THROWS(memlist_multipartite(path_graph(4), 16, 1));
  CHECK_THROWS(memlist_general(cycle_graph(5), 16, 1));
  CHECK_NOTHROW(memlist_general(cycle_graph(5), 16, 2));
  CHECK_THROWS(memlist_edge_del(cycle_graph(5), 16, 1));
  CHECK_NOTHROW(memlist_node_del(cycle_graph(5), 16, 1));
  CHECK_THROWS(memlist_node_del(path_graph(4), 16, 1));
  CHECK_THROWS(memdetect_star(cycle_graph(4)));
  CHECK_THROWS(memdetect_rad1_node_del(cycle_graph(4)));
  CHECK_THROWS(memdetect_multipartite_node_del(path_graph(4)));
  CHECK_THROWS(list_star_del(cycle_graph(4), ChangeType::EdgeDel));
  CHECK_THROWS(list_rad1_edge_del(cycle_graph(4)));
  CHECK_THROWS(list_center_del(cycle_graph(5), 16, ChangeType::EdgeDel));
  CHECK_NOTHROW(list_center_del(cycle_graph(5), 16, ChangeType::NodeDel));
  CHECK_THROWS(list_center_del(cycle_graph(4), 16, ChangeType::EdgeIns));
}

TEST_CASE("radius-1 view: an insertion completing a four-cycle") {
  Schedule s;
  s.initial = path_graph(4);
  s.initial = Graph::from_edges(8, {{1, 2}, {2, 3}, {3, 4}});
  s.model = {ChangeType::EdgeIns};
  s.push(Event::edge_ins(1, 4));
  auto rep = run(*memlist_multipartite(cycle_graph(4), 8, 1), cycle_graph(4), s);
  CHECK(rep.verdict.pass);
  for (NodeId v : {1, 2, 3, 4}) {
    auto* cs = listed(rep.rounds[0], v);
    REQUIRE(cs);
    CHECK(cs->size() == 1);
  }
}

TEST_CASE("radius-1 view on random mixed schedules") {
  std::mt19937_64 rng(1);
  for (int r : {1, 2, 4})
    for (int it = 0; it < 8; ++it) {
      int n = 16;
      Schedule s = gen(host(n, 4, 0.2, rng), "edge_ins:2,edge_del:2,node_ins:1,node_del:1", r, 40, 100 * r + it);
      auto rep = run(*memlist_multipartite(cycle_graph(4), n, r), cycle_graph(4), s);
      CHECK_MESSAGE(rep.verdict.pass, rep.verdict.reason);
      CHECK(rep.max_bits <= div_ceil(n, r));
    }
  Graph p3 = path_graph(3);
  for (int it = 0; it < 5; ++it) {
    Schedule s = gen(ref::random_graph(12, 0.3, rng), "edge_del", 1, 20, it);
    CHECK(run(*memlist_multipartite(p3, 12, 1), p3, s).verdict.pass);
  }
}

TEST_CASE("radius-t view for P4 and C5") {
  std::mt19937_64 rng(2);
  for (const Graph& h : {path_graph(4), cycle_graph(5)}) {
    int rh = params(h).r_H;
    REQUIRE(rh == 2);
    for (int r : {rh, 2 * rh})
      for (int it = 0; it < 4; ++it) {
        int n = it % 2 ? 32 : 14;
        Schedule s = gen(host(n, 3, 4.0 / n, rng), "edge_ins:2,edge_del:2,node_ins:1,node_del:1", r, 30, it + 7 * r);
        auto rep = run(*memlist_general(h, n, r), h, s);
        CHECK_MESSAGE(rep.verdict.pass, rep.verdict.reason);
        CHECK(rep.max_bits <= div_ceil(view_payload_bits(n, rh, false), r / rh));
      }
  }
}

TEST_CASE("edge-deletion flood: C4 members stop listing in the same round") {
  Schedule s;
  s.initial = Graph::from_edges(6, {{1, 2}, {2, 3}, {3, 4}, {1, 4}, {4, 5}});
  s.model = {ChangeType::EdgeDel};
  s.push(Event::edge_del(2, 3));
  auto rep = run(*memlist_edge_del(cycle_graph(4), 6, 1), cycle_graph(4), s);
  CHECK(rep.verdict.pass);
  CHECK(rep.rounds[0].outputs.empty());
}

TEST_CASE("edge-deletion flood: C5, far node drops at the window end") {
  Schedule s;
  s.initial = cycle_graph(5);
  s.model = {ChangeType::EdgeDel};
  s.r = 2;
  s.change(Event::edge_del(3, 4));
  auto rep = run(*memlist_edge_del(cycle_graph(5), 5, 2), cycle_graph(5), s);
  CHECK(rep.verdict.pass);
  CHECK(rep.rounds[1].graded);
  CHECK(rep.rounds[1].outputs.empty());
}

TEST_CASE("deletion floods on random schedules") {
  std::mt19937_64 rng(3);
  for (const Graph& h : {cycle_graph(4), cycle_graph(5), path_graph(4), complete_graph(3)}) {
    auto P = params(h);
    for (int it = 0; it < 6; ++it) {
      int n = 14;
      Graph g0 = it % 2 ? blow_up(h, std::vector<int>(h.node_count(), 2)) : ref::random_graph(n, 0.35, rng);
      int nn = g0.id_range();
      int L = id_width(nn);
      for (int mult : {1, 2}) {
        int re = std::max(1, P.r_H) * mult;
        auto se = gen(g0, "edge_del", re, 15, it);
        auto a = run(*memlist_edge_del(h, nn, re), h, se);
        CHECK_MESSAGE(a.verdict.pass, a.verdict.reason);
        int Fe = re / P.r_H;
        CHECK(a.max_bits <= div_ceil(2 * L, Fe) + flood_header_bits(P.r_H, re));
        check_shrinking(a);

        int rn = std::max(1, P.r_H_prime) * mult;
        auto sn = gen(g0, "node_del", rn, 6, it);
        auto b = run(*memlist_node_del(h, nn, rn), h, sn);
        CHECK_MESSAGE(b.verdict.pass, b.verdict.reason);
        check_shrinking(b);
        if (P.r_H_prime == 0)
          CHECK(b.total_bits == 0);
        else
          CHECK(b.max_bits <= div_ceil(L, rn / P.r_H_prime) + flood_header_bits(P.r_H_prime, rn));
      }
    }
  }
}

TEST_CASE("star membership detection") {
  Graph star = parse_graph_spec("K_{1,3}");
  Schedule s;
  s.initial = Graph(8);
  s.model = {ChangeType::EdgeIns};
  s.push(Event::edge_ins(1, 2)).push(Event::edge_ins(1, 3)).push(Event::edge_ins(1, 4));
  auto rep = run(*memdetect_star(star), star, s);
  CHECK(rep.verdict.pass);
  CHECK(rep.rounds[1].outputs.empty());
  CHECK(rep.rounds[2].outputs.size() == 4);

  std::mt19937_64 rng(4);
  for (int it = 0; it < 10; ++it) {
    auto s2 = gen(host(16, 4, 0.15, rng), "edge_ins:1,edge_del:1,node_ins:1,node_del:1", 1, 40, it);
    auto r2 = run(*memdetect_star(star), star, s2);
    CHECK_MESSAGE(r2.verdict.pass, r2.verdict.reason);
    CHECK(r2.max_bits <= 1);
  }
}

TEST_CASE("radius-1 membership detection under node deletions") {
  Graph paw = paw_graph();
  std::mt19937_64 rng(5);
  Schedule s;
  s.initial = Graph::from_edges(5, {{1, 2}, {1, 3}, {2, 3}, {1, 4}});
  s.model = {ChangeType::NodeDel};
  s.pad(2).push(Event::node_del(1)).pad(1);
  auto rep = run(*memdetect_rad1_node_del(paw), paw, s);
  CHECK(rep.verdict.pass);
  CHECK(rep.rounds[0].outputs.size() == 4);
  CHECK(rep.rounds[1].outputs == rep.rounds[0].outputs);
  CHECK(rep.rounds[2].outputs.empty());
  for (int it = 0; it < 15; ++it) {
    Graph g0 = it % 3 ? ref::random_graph(14, 0.35, rng) : blow_up(paw, {1, 2, 2, 3});
    auto s2 = gen(g0, "node_del", 1, g0.node_count() - 2, it);
    auto r2 = run(*memdetect_rad1_node_del(paw), paw, s2);
    CHECK_MESSAGE(r2.verdict.pass, r2.verdict.reason);
  }
}

TEST_CASE("one-bit multipartite detection under node deletions") {
  Graph c4 = cycle_graph(4);
  // u=1, w=2, v=3, z=4: w's only common partner of {u,v} is z.
  Schedule s;
  s.initial = Graph::from_edges(5, {{1, 2}, {2, 3}, {1, 4}, {3, 4}});
  s.model = {ChangeType::NodeDel};
  s.push(Event::node_del(4));
  auto rep = run(*memdetect_multipartite_node_del(c4), c4, s);
  CHECK(rep.verdict.pass);
  CHECK(rep.rounds[0].outputs.empty());
  for (const auto& [e, b] : rep.rounds[0].bits) CHECK(b == 1);
  CHECK(rep.messages == 2);

  std::mt19937_64 rng(6);
  for (const Graph& h : {c4, complete_multipartite({2, 2, 2}), complete_multipartite({3, 3})}) {
    for (int it = 0; it < 8; ++it) {
      Graph g0 = it % 2 ? blow_up(h, std::vector<int>(h.node_count(), 2)) : ref::random_graph(14, 0.45, rng);
      auto s2 = gen(g0, "node_del", 1, g0.node_count() - 3, it);
      auto r2 = run(*memdetect_multipartite_node_del(h), h, s2);
      CHECK_MESSAGE(r2.verdict.pass, r2.verdict.reason);
      for (const auto& rec : r2.rounds)
        for (const auto& [e, b] : rec.bits) CHECK(b == 1);
    }
  }
}

TEST_CASE("count table helper") {
  Graph g = complete_multipartite({2, 2, 2});
  CHECK(common_count(g, 1, {3, 5}) == 1);  // only node 2
  CHECK(common_count(g, 1, {3}) == 3);
}

TEST_CASE("zero-bit star listing under deletions") {
  Graph star = parse_graph_spec("K_{1,3}");
  // Two stars: centre 1 with leaves 2..5, centre 6 with leaves 7..9.
  Graph g0 = Graph::from_edges(9, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {6, 7}, {6, 8}, {6, 9}});
  Schedule s;
  s.initial = g0;
  s.model = {ChangeType::EdgeDel};
  s.push(Event::edge_del(1, 5)).pad(1);
  auto rep = run(*list_star_del(star, ChangeType::EdgeDel), star, s);
  CHECK(rep.verdict.pass);
  CHECK(rep.total_bits == 0);
  REQUIRE(listed(rep.rounds[0], 1));
  CHECK(listed(rep.rounds[0], 1)->size() == 1);
  CHECK(rep.rounds[1].outputs == rep.rounds[0].outputs);

  Schedule t;
  t.initial = g0;
  t.model = {ChangeType::NodeDel};
  t.push(Event::node_del(6)).push(Event::node_del(2));
  auto rt = run(*list_star_del(star, ChangeType::NodeDel), star, t);
  CHECK(rt.verdict.pass);
  CHECK(rt.total_bits == 0);

  std::mt19937_64 rng(7);
  for (int it = 0; it < 10; ++it) {
    Graph h = it % 2 ? star : paw_graph();
    ChangeType m = it % 2 ? ChangeType::EdgeDel : ChangeType::NodeDel;
    Graph g1 = ref::random_graph(14, 0.3, rng);
    auto s2 = gen(g1, change_name(m), 1, 12, it);
    auto r2 = run(*list_star_del(h, m), h, s2);
    CHECK_MESSAGE(r2.verdict.pass, r2.verdict.reason);
    CHECK(r2.total_bits == 0);
  }
}

TEST_CASE("one-bit radius-1 listing under edge deletions") {
  Graph paw = paw_graph();
  // Host = paw; the far edge {2,3} is not incident to the centre 1.
  Schedule s;
  s.initial = Graph::from_edges(5, {{1, 2}, {1, 3}, {2, 3}, {1, 4}, {1, 5}});
  s.model = {ChangeType::EdgeDel};
  s.push(Event::edge_del(2, 3)).pad(1);
  auto rep = run(*list_rad1_edge_del(paw), paw, s);
  CHECK(rep.verdict.pass);
  CHECK(rep.rounds[0].outputs.empty());
  CHECK(rep.max_bits == 1);

  std::mt19937_64 rng(8);
  for (int it = 0; it < 12; ++it) {
    Graph g0 = it % 3 ? ref::random_graph(14, 0.35, rng) : blow_up(paw, {1, 2, 2, 2});
    auto s2 = gen(g0, "edge_del", 1, 20, it);
    auto r2 = run(*list_rad1_edge_del(paw), paw, s2);
    CHECK_MESSAGE(r2.verdict.pass, r2.verdict.reason);
    CHECK(r2.max_bits <= 1);
    check_shrinking(r2);
  }
}

TEST_CASE("centre listing with identified deletions") {
  std::mt19937_64 rng(9);
  for (int it = 0; it < 12; ++it) {
    Graph c4 = cycle_graph(4);
    Graph g0 = it % 2 ? blow_up(c4, {2, 2, 2, 2}) : ref::random_graph(14, 0.35, rng);
    int n = g0.id_range();
    auto s = gen(g0, "edge_del", 1, 20, it);
    auto rep = run(*list_center_del(c4, n, ChangeType::EdgeDel), c4, s);
    CHECK_MESSAGE(rep.verdict.pass, rep.verdict.reason);
    CHECK(rep.max_bits <= 2 * id_width(n));
  }
  for (int it = 0; it < 12; ++it) {
    Graph c5 = cycle_graph(5);
    Graph g0 = it % 2 ? blow_up(c5, {2, 2, 1, 2, 1}) : ref::random_graph(14, 0.35, rng);
    int n = g0.id_range();
    auto s = gen(g0, "node_del", 1, 6, it);
    auto rep = run(*list_center_del(c5, n, ChangeType::NodeDel), c5, s);
    CHECK_MESSAGE(rep.verdict.pass, rep.verdict.reason);
    CHECK(rep.max_bits <= id_width(n));
  }
}

TEST_CASE("lister choice is the minimum ID centre") {
  Copy c = ref::canon({{1, 2}, {2, 3}, {3, 4}});  // path 1-2-3-4, centres 2 and 3
  CHECK(copy_lister(c, false) == 2);
  Copy s = ref::canon({{5, 1}, {5, 2}, {5, 3}});
  CHECK(copy_lister(s, false) == 5);
  CHECK(copy_lister(s, true) == 5);
}
