#include "dynsub/graph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <limits>
#include <numeric>
#include <regex>
#include <sstream>

namespace dynsub {

Graph::Graph(int n) {
  grow(n);
  for (NodeId v = 1; v <= n; ++v) present_[v] = 1;
  count_ = n;
}

Graph Graph::with_absent(int id_range) {
  Graph g;
  g.grow(id_range);
  return g;
}

Graph Graph::from_edges(int n, const std::vector<Edge>& edges) {
  Graph g(n);
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

void Graph::grow(int n) {
  if (n < 0) throw GraphError("negative id range");
  if (n > id_range()) {
    present_.resize(n + 1, 0);
    adj_.resize(n + 1);
  }
}

void Graph::check(NodeId v) const {
  if (!has_node(v)) throw GraphError("unknown node id " + std::to_string(v));
}

void Graph::add_node(NodeId v) {
  if (v < 1) throw GraphError("node ids start at 1");
  grow(v);
  if (present_[v]) throw GraphError("node " + std::to_string(v) + " already present");
  present_[v] = 1;
  ++count_;
}

void Graph::remove_node(NodeId v) {
  check(v);
  for (NodeId w : std::vector<NodeId>(adj_[v])) remove_edge(v, w);
  present_[v] = 0;
  --count_;
}

void Graph::add_edge(NodeId u, NodeId v) {
  check(u);
  check(v);
  if (u == v) throw GraphError("self-loop");
  auto& au = adj_[u];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it != au.end() && *it == v) throw GraphError("duplicate edge");
  au.insert(it, v);
  auto& av = adj_[v];
  av.insert(std::lower_bound(av.begin(), av.end(), u), u);
  ++edges_;
}

void Graph::remove_edge(NodeId u, NodeId v) {
  if (!has_edge(u, v)) throw GraphError("not an edge");
  auto& au = adj_[u];
  au.erase(std::lower_bound(au.begin(), au.end(), v));
  auto& av = adj_[v];
  av.erase(std::lower_bound(av.begin(), av.end(), u));
  --edges_;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (!has_node(u) || !has_node(v)) return false;
  return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

const std::vector<NodeId>& Graph::neighbors(NodeId v) const {
  check(v);
  return adj_[v];
}

int Graph::max_degree() const {
  std::size_t m = 0;
  for (const auto& a : adj_) m = std::max(m, a.size());
  return static_cast<int>(m);
}

std::vector<NodeId> Graph::nodes() const {
  std::vector<NodeId> out;
  out.reserve(count_);
  for (NodeId v = 1; v <= id_range(); ++v)
    if (present_[v]) out.push_back(v);
  return out;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_);
  for (NodeId u = 1; u <= id_range(); ++u)
    for (NodeId v : adj_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph complete_graph(int n) {
  Graph g(n);
  for (int u = 1; u <= n; ++u)
    for (int v = u + 1; v <= n; ++v) g.add_edge(u, v);
  return g;
}

Graph cycle_graph(int n) {
  if (n < 3) throw GraphError("cycle needs 3 nodes");
  Graph g(n);
  for (int u = 1; u <= n; ++u) g.add_edge(u, u % n + 1);
  return g;
}

Graph path_graph(int n) {
  Graph g(n);
  for (int u = 1; u < n; ++u) g.add_edge(u, u + 1);
  return g;
}

Graph complete_multipartite(const std::vector<int>& sizes) {
  int n = std::accumulate(sizes.begin(), sizes.end(), 0);
  std::vector<int> part(n + 1);
  int id = 1;
  for (std::size_t p = 0; p < sizes.size(); ++p)
    for (int k = 0; k < sizes[p]; ++k) part[id++] = static_cast<int>(p);
  Graph g(n);
  for (int u = 1; u <= n; ++u)
    for (int v = u + 1; v <= n; ++v)
      if (part[u] != part[v]) g.add_edge(u, v);
  return g;
}

Graph paw_graph() { return Graph::from_edges(4, {{1, 2}, {1, 3}, {2, 3}, {1, 4}}); }

Graph blow_up(const Graph& h, const std::vector<int>& sizes) {
  if (static_cast<int>(sizes.size()) != h.id_range()) throw GraphError("blow_up: one size per target node");
  std::vector<int> first(sizes.size() + 1, 1);
  for (std::size_t i = 0; i < sizes.size(); ++i) first[i + 1] = first[i] + sizes[i];
  std::vector<Edge> es;
  for (auto [a, b] : h.edges())
    for (int x = first[a - 1]; x < first[a]; ++x)
      for (int y = first[b - 1]; y < first[b]; ++y) es.push_back(make_edge(x, y));
  return Graph::from_edges(first.back() - 1, es);
}

Graph parse_graph_spec(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  std::smatch m;
  if (s == "paw") return paw_graph();
  if (std::regex_match(s, m, std::regex(R"(K(\d+))"))) return complete_graph(std::stoi(m[1]));
  if (std::regex_match(s, m, std::regex(R"(C(\d+))"))) return cycle_graph(std::stoi(m[1]));
  if (std::regex_match(s, m, std::regex(R"(P(\d+))"))) return path_graph(std::stoi(m[1]));
  if (std::regex_match(s, m, std::regex(R"(K_\{?([\d,]+)\}?)"))) {
    std::vector<int> sizes;
    std::stringstream ss(m[1].str());
    for (std::string tok; std::getline(ss, tok, ',');) {
      if (tok.empty()) throw GraphError("bad part size in " + raw);
      sizes.push_back(std::stoi(tok));
    }
    return complete_multipartite(sizes);
  }
  if (std::regex_match(s, std::regex(R"(\d+-\d+(,\d+-\d+)*)"))) {
    std::vector<Edge> es;
    int n = 0;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
      auto dash = tok.find('-');
      int u = std::stoi(tok.substr(0, dash)), v = std::stoi(tok.substr(dash + 1));
      es.push_back(make_edge(u, v));
      n = std::max({n, u, v});
    }
    return Graph::from_edges(n, es);
  }
  throw GraphError("unrecognized graph spec '" + raw + "'");
}

std::vector<int> bfs_distances(const Graph& g, NodeId src) {
  std::vector<int> dist(g.id_range() + 1, -1);
  if (!g.has_node(src)) throw GraphError("unknown node id " + std::to_string(src));
  std::deque<NodeId> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId w : g.neighbors(u))
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        q.push_back(w);
      }
  }
  return dist;
}

std::optional<int> distance(const Graph& g, NodeId u, NodeId v) {
  if (!g.has_node(v)) throw GraphError("unknown node id " + std::to_string(v));
  int d = bfs_distances(g, u)[v];
  if (d < 0) return std::nullopt;
  return d;
}

std::optional<int> node_edge_distance(const Graph& g, NodeId u, const Edge& e) {
  if (!g.has_edge(e.first, e.second)) throw GraphError("not an edge of the graph");
  auto dist = bfs_distances(g, u);
  int a = dist[e.first], b = dist[e.second];
  if (a < 0 && b < 0) return std::nullopt;
  if (a < 0) return 1 + b;
  if (b < 0) return 1 + a;
  return 1 + std::min(a, b);
}

bool is_connected(const Graph& g) {
  auto ns = g.nodes();
  if (ns.empty()) return true;
  auto dist = bfs_distances(g, ns.front());
  return std::all_of(ns.begin(), ns.end(), [&](NodeId v) { return dist[v] >= 0; });
}

std::optional<Parts> multipartite_parts(const Graph& g) {
  auto ns = g.nodes();
  std::vector<int> label(g.id_range() + 1, -1);
  Parts parts;
  for (NodeId u : ns) {
    if (label[u] >= 0) continue;
    label[u] = static_cast<int>(parts.size());
    parts.push_back({u});
    for (NodeId v : ns)
      if (v > u && !g.has_edge(u, v)) {
        if (label[v] >= 0) return std::nullopt;
        label[v] = label[u];
        parts.back().push_back(v);
      }
  }
  // Each class must be independent and every cross pair adjacent.
  for (NodeId u : ns)
    for (NodeId v : ns)
      if (u < v && (label[u] == label[v]) == g.has_edge(u, v)) return std::nullopt;
  return parts;  // built in increasing min-ID order
}

bool is_complete_multipartite(const Graph& g) { return multipartite_parts(g).has_value(); }

bool is_clique(const Graph& g) {
  long n = g.node_count();
  return static_cast<long>(g.edge_count()) == n * (n - 1) / 2;
}

bool is_star(const Graph& g) {
  int n = g.node_count();
  if (n < 2 || static_cast<int>(g.edge_count()) != n - 1) return false;
  for (NodeId v : g.nodes())
    if (g.degree(v) == n - 1) return true;
  return false;
}

GraphParams params(const Graph& g) {
  if (g.node_count() < 3) throw GraphError("target needs at least three nodes");
  if (!is_connected(g)) throw GraphError("target must be connected");
  GraphParams p;
  auto ns = g.nodes();
  auto es = g.edges();
  p.rad = p.ne_rad = std::numeric_limits<int>::max();
  for (NodeId u : ns) {
    auto dist = bfs_distances(g, u);
    int e = 0, ne = 0;
    for (NodeId v : ns) e = std::max(e, dist[v]);
    for (auto [a, b] : es) ne = std::max(ne, 1 + std::min(dist[a], dist[b]));
    p.ecc[u] = e;
    p.ne_ecc[u] = ne;
    p.diam = std::max(p.diam, e);
    p.rad = std::min(p.rad, e);
    p.ne_diam = std::max(p.ne_diam, ne);
    p.ne_rad = std::min(p.ne_rad, ne);
  }
  for (NodeId u : ns) {
    if (p.ecc[u] == p.rad) p.center.push_back(u);
    if (p.ne_ecc[u] == p.ne_rad) p.ne_center.push_back(u);
  }
  p.r_H = p.ne_diam - 1;
  p.r_H_prime = p.diam - 1;
  p.is_clique = is_clique(g);
  p.is_star = is_star(g);
  p.parts = multipartite_parts(g);
  p.is_complete_multipartite = p.parts.has_value();
  return p;
}

std::vector<NodeId> ball_nodes(const Graph& g, NodeId u, int r) {
  auto dist = bfs_distances(g, u);
  std::vector<NodeId> out;
  for (NodeId v = 1; v <= g.id_range(); ++v)
    if (dist[v] >= 0 && dist[v] <= r) out.push_back(v);
  return out;
}

std::vector<Edge> ball_edges(const Graph& g, NodeId u, int r) {
  auto dist = bfs_distances(g, u);
  std::vector<Edge> out;
  for (auto [a, b] : g.edges()) {
    bool in_a = dist[a] >= 0 && dist[a] <= r, in_b = dist[b] >= 0 && dist[b] <= r;
    if (in_a || in_b) out.emplace_back(a, b);
  }
  return out;
}

nlohmann::json to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.id_range();
  nlohmann::json es = nlohmann::json::array();
  for (auto [u, v] : g.edges()) es.push_back({u, v});
  j["edges"] = es;
  std::vector<NodeId> absent;
  for (NodeId v = 1; v <= g.id_range(); ++v)
    if (!g.has_node(v)) absent.push_back(v);
  if (!absent.empty()) j["absent"] = absent;
  return j;
}

Graph graph_from_json(const nlohmann::json& j) {
  int n = j.at("n").get<int>();
  Graph g(n);
  for (const auto& e : j.at("edges")) g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
  if (j.contains("absent"))
    for (const auto& v : j["absent"]) g.remove_node(v.get<int>());
  return g;
}

nlohmann::json params_to_json(const GraphParams& p) {
  auto map_json = [](const std::map<NodeId, int>& m) {
    nlohmann::json o = nlohmann::json::object();
    for (auto [k, v] : m) o[std::to_string(k)] = v;
    return o;
  };
  nlohmann::json j;
  j["ecc"] = map_json(p.ecc);
  j["diam"] = p.diam;
  j["rad"] = p.rad;
  j["center"] = p.center;
  j["ne_ecc"] = map_json(p.ne_ecc);
  j["ne_diam"] = p.ne_diam;
  j["ne_rad"] = p.ne_rad;
  j["ne_center"] = p.ne_center;
  j["r_H"] = p.r_H;
  j["r_H_prime"] = p.r_H_prime;
  j["is_clique"] = p.is_clique;
  j["is_star"] = p.is_star;
  j["is_complete_multipartite"] = p.is_complete_multipartite;
  if (p.parts) j["parts"] = *p.parts;
  return j;
}

}  // namespace dynsub
