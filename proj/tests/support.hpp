#pragma once
// Independent reference implementations for tests. Nothing here calls the
// library's own distance, classifier or enumeration code.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "dynsub/graph.hpp"
#include "dynsub/oracle.hpp"
#include "dynsub/sim.hpp"

namespace ref {

using dynsub::Edge;
using dynsub::Graph;
using dynsub::NodeId;

constexpr int kInf = 1 << 20;

// All-pairs distances, 1-indexed, kInf when unreachable.
inline std::vector<std::vector<int>> floyd(const Graph& g) {
  int n = g.id_range();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(n + 1, kInf));
  for (int v = 1; v <= n; ++v)
    if (g.has_node(v)) d[v][v] = 0;
  for (auto [a, b] : g.edges()) d[a][b] = d[b][a] = 1;
  for (int k = 1; k <= n; ++k)
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Graph on 1..n from the bits of `mask` over the pairs (i<j) in order.
inline Graph from_mask(int n, std::uint32_t mask) {
  Graph g(n);
  int k = 0;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j, ++k)
      if (mask >> k & 1u) g.add_edge(i, j);
  return g;
}

inline bool connected(const std::vector<std::vector<int>>& d, int n) {
  for (int v = 1; v <= n; ++v)
    if (d[1][v] >= kInf) return false;
  return true;
}

// Complement components are all cliques (in the complement).
inline bool complement_route(const Graph& g) {
  int n = g.id_range();
  std::vector<int> comp(n + 1, -1);
  int c = 0;
  for (int s = 1; s <= n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> st{s};
    comp[s] = c;
    while (!st.empty()) {
      int x = st.back();
      st.pop_back();
      for (int y = 1; y <= n; ++y)
        if (y != x && !g.has_edge(x, y) && comp[y] < 0) {
          comp[y] = c;
          st.push_back(y);
        }
    }
    ++c;
  }
  for (int x = 1; x <= n; ++x)
    for (int y = x + 1; y <= n; ++y)
      if (comp[x] == comp[y] && g.has_edge(x, y)) return false;
  return true;
}

// No node independent of an edge (no induced co-P3).
inline bool co_p3_free(const Graph& g) {
  for (auto [a, b] : g.edges())
    for (NodeId x : g.nodes())
      if (x != a && x != b && !g.has_edge(x, a) && !g.has_edge(x, b)) return false;
  return true;
}

inline dynsub::Copy canon(std::vector<Edge> es) {
  for (auto& e : es)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(es.begin(), es.end());
  return es;
}

// Every injective map V(h) -> V(g) whose image keeps all h-edges.
inline dynsub::CopySet brute_copies(const Graph& g, const Graph& h) {
  auto hn = h.nodes();
  auto gn = g.nodes();
  dynsub::CopySet out;
  std::vector<NodeId> img(hn.size());
  std::vector<char> used(g.id_range() + 1, 0);
  std::function<void(std::size_t)> go = [&](std::size_t k) {
    if (k == hn.size()) {
      std::vector<Edge> es;
      for (auto [a, b] : h.edges()) {
        std::size_t ia = std::find(hn.begin(), hn.end(), a) - hn.begin();
        std::size_t ib = std::find(hn.begin(), hn.end(), b) - hn.begin();
        if (!g.has_edge(img[ia], img[ib])) return;
        es.push_back({img[ia], img[ib]});
      }
      out.insert(canon(es));
      return;
    }
    for (NodeId v : gn) {
      if (used[v]) continue;
      used[v] = 1;
      img[k] = v;
      go(k + 1);
      used[v] = 0;
    }
  };
  go(0);
  return out;
}

inline Graph random_graph(int n, double p, std::mt19937_64& rng) {
  Graph g(n);
  std::bernoulli_distribution coin(p);
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if (coin(rng)) g.add_edge(i, j);
  return g;
}

inline int ceil_log2(std::uint64_t x) {
  int k = 0;
  while ((std::uint64_t{1} << k) < x) ++k;
  return k;
}

}  // namespace ref
