#include "dynsub/oracle.hpp"

#include <algorithm>
#include <deque>

namespace dynsub {

namespace {

// Target prepared for backtracking: nodes in BFS order from a root, each
// with its parent slot and the earlier slots it must be adjacent to.
struct Plan {
  std::vector<NodeId> order;
  std::vector<int> parent;
  std::vector<std::vector<int>> back;
  std::vector<std::pair<int, int>> edges;  // slot pairs
};

Plan make_plan(const Graph& h, NodeId root) {
  Plan p;
  std::vector<int> slot(h.id_range() + 1, -1);
  std::deque<NodeId> q{root};
  slot[root] = 0;
  p.order.push_back(root);
  p.parent.push_back(-1);
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId w : h.neighbors(u))
      if (slot[w] < 0) {
        slot[w] = static_cast<int>(p.order.size());
        p.order.push_back(w);
        p.parent.push_back(slot[u]);
        q.push_back(w);
      }
  }
  p.back.resize(p.order.size());
  for (auto [a, b] : h.edges()) {
    int sa = slot[a], sb = slot[b];
    p.edges.emplace_back(sa, sb);
    if (sa < sb) p.back[sb].push_back(sa);
    else p.back[sa].push_back(sb);
  }
  return p;
}

void check_target(const Graph& h) {
  int k = h.node_count();
  if (k < 3) throw GraphError("target needs at least three nodes");
  if (k > kMaxTargetNodes) throw GraphError("target too large for exhaustive enumeration");
  if (!is_connected(h)) throw GraphError("target must be connected");
}

// Adjacency source: either a Graph or a raw edge list.
template <typename Adj>
struct Search {
  const Adj& adj;
  const Plan& plan;
  std::vector<NodeId> map;
  CopySet* out;
  bool stop_first = false;
  bool found = false;

  void emit() {
    Copy c;
    c.reserve(plan.edges.size());
    for (auto [a, b] : plan.edges) c.push_back(make_edge(map[a], map[b]));
    std::sort(c.begin(), c.end());
    if (out) out->insert(std::move(c));
    found = true;
  }

  void go(std::size_t k) {
    if (stop_first && found) return;
    if (k == plan.order.size()) {
      emit();
      return;
    }
    for (NodeId cand : adj.neighbors(map[plan.parent[k]])) {
      if (std::find(map.begin(), map.begin() + k, cand) != map.begin() + k) continue;
      bool ok = true;
      for (int s : plan.back[k])
        if (s != plan.parent[k] && !adj.has_edge(map[s], cand)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      map[k] = cand;
      go(k + 1);
      if (stop_first && found) return;
    }
  }

  void from(NodeId start) {
    map.assign(plan.order.size(), 0);
    map[0] = start;
    go(1);
  }
};

struct EdgeListAdj {
  std::vector<std::vector<NodeId>> adj;
  EdgeListAdj(int n, const std::vector<Edge>& es) : adj(n + 1) {
    for (auto [u, v] : es) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    for (auto& a : adj) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
  }
  const std::vector<NodeId>& neighbors(NodeId v) const { return adj[v]; }
  bool has_edge(NodeId u, NodeId v) const { return std::binary_search(adj[u].begin(), adj[u].end(), v); }
};

}  // namespace

Copy canon(Copy c) {
  for (auto& e : c) e = make_edge(e.first, e.second);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

std::vector<NodeId> copy_nodes(const Copy& c) {
  std::vector<NodeId> out;
  for (auto [u, v] : c) {
    out.push_back(u);
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool copy_has_node(const Copy& c, NodeId v) {
  return std::any_of(c.begin(), c.end(), [v](const Edge& e) { return e.first == v || e.second == v; });
}

bool copy_has_edge(const Copy& c, const Edge& e) { return std::binary_search(c.begin(), c.end(), e); }

CopySet enumerate_copies(const Graph& g, const Graph& h) {
  check_target(h);
  CopySet out;
  Plan plan = make_plan(h, h.nodes().front());
  Search<Graph> s{g, plan, {}, &out};
  for (NodeId v : g.nodes())
    if (g.degree(v) >= 1) s.from(v);
  return out;
}

CopySet copies_containing(const Graph& g, const Graph& h, NodeId v) {
  check_target(h);
  if (!g.has_node(v)) throw GraphError("unknown node id " + std::to_string(v));
  CopySet out;
  // Anchor v at every target node; up to automorphisms this covers all copies.
  for (NodeId root : h.nodes()) {
    Plan plan = make_plan(h, root);
    Search<Graph> s{g, plan, {}, &out};
    s.from(v);
  }
  return out;
}

bool in_some_copy(const Graph& g, const Graph& h, NodeId v) {
  check_target(h);
  if (!g.has_node(v)) throw GraphError("unknown node id " + std::to_string(v));
  for (NodeId root : h.nodes()) {
    Plan plan = make_plan(h, root);
    Search<Graph> s{g, plan, {}, nullptr, true};
    s.from(v);
    if (s.found) return true;
  }
  return false;
}

bool contains_copy(const Graph& g, const Graph& h) {
  check_target(h);
  Plan plan = make_plan(h, h.nodes().front());
  Search<Graph> s{g, plan, {}, nullptr, true};
  for (NodeId v : g.nodes()) {
    s.from(v);
    if (s.found) return true;
  }
  return false;
}

CopySet copies_in_edges(int id_range, const std::vector<Edge>& edges, const Graph& h) {
  check_target(h);
  EdgeListAdj adj(id_range, edges);
  CopySet out;
  Plan plan = make_plan(h, h.nodes().front());
  Search<EdgeListAdj> s{adj, plan, {}, &out};
  for (NodeId v = 1; v <= id_range; ++v)
    if (!adj.adj[v].empty()) s.from(v);
  return out;
}

std::map<NodeId, CopySet> index_by_node(const CopySet& all) {
  std::map<NodeId, CopySet> out;
  for (const auto& c : all)
    for (NodeId v : copy_nodes(c)) out[v].insert(c);
  return out;
}

nlohmann::json copy_to_json(const Copy& c) {
  nlohmann::json j = nlohmann::json::array();
  for (auto [u, v] : c) j.push_back({u, v});
  return j;
}

Copy copy_from_json(const nlohmann::json& j) {
  Copy c;
  for (const auto& e : j) c.push_back(make_edge(e.at(0).get<int>(), e.at(1).get<int>()));
  return canon(c);
}

}  // namespace dynsub
