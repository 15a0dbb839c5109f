#include "dynsub/general.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "dynsub/blocks.hpp"

namespace dynsub {

namespace {

int div_ceil(int a, int b) { return (a + b - 1) / b; }

const std::vector<NodeId>& g0_neighbors(const Graph& g0, NodeId x) {
  static const std::vector<NodeId> kNone;
  return g0.has_node(x) ? g0.neighbors(x) : kNone;
}

// Copy as a graph on 1..k, plus the map back to host IDs.
std::pair<Graph, std::vector<NodeId>> relabel(const Copy& c) {
  auto ns = copy_nodes(c);
  std::vector<Edge> es;
  for (auto [a, b] : c) {
    int ia = static_cast<int>(std::lower_bound(ns.begin(), ns.end(), a) - ns.begin()) + 1;
    int ib = static_cast<int>(std::lower_bound(ns.begin(), ns.end(), b) - ns.begin()) + 1;
    es.push_back(make_edge(ia, ib));
  }
  return {Graph::from_edges(static_cast<int>(ns.size()), es), ns};
}

// ---------------------------------------------------------------------------
// Streamed local views.
//
// Payload of sender x: incident part (bit per other ID, or per every ID in
// bitmap mode), then for every pair {a,b} of IDs other than x, in
// lexicographic order, the hop label in [1, t-1] of that edge as seen from x
// (0 = unknown). Hop label = distance from x to the nearer endpoint.

struct ViewLayout {
  int n = 0;
  int t = 1;
  bool bitmap = false;
  int inc_len = 0;
  int wl = 0;
  int pairs = 0;
  int P = 0;
  int L = 1;   // rounds per payload
  int bb = 0;  // bits per block

  ViewLayout(int n_, int t_, bool bitmap_, int L_) : n(n_), t(t_), bitmap(bitmap_), L(L_) {
    inc_len = bitmap ? n : n - 1;
    wl = ceil_log2(static_cast<std::uint64_t>(t));
    pairs = (n - 1) * (n - 2) / 2;
    P = inc_len + (wl > 0 ? pairs * wl : 0);
    bb = div_ceil(P, L);
  }

  int inc_pos(NodeId x, NodeId y) const { return bitmap ? y - 1 : (y < x ? y - 1 : y - 2); }
  NodeId inc_id(NodeId x, int pos) const { return bitmap ? pos + 1 : (pos + 1 < x ? pos + 1 : pos + 2); }

  // Rank of {a,b} among pairs of [n]\{x}.
  int rank(NodeId x, NodeId a, NodeId b) const {
    int m = n - 1;
    int ia = a - 1 - (a > x ? 1 : 0), ib = b - 1 - (b > x ? 1 : 0);
    if (ia > ib) std::swap(ia, ib);
    return ia * (2 * m - ia - 1) / 2 + (ib - ia - 1);
  }
};

using Labels = std::map<Edge, int>;

// Hop labels (<= maxl) of all edges near x in g.
Labels labels_from_graph(const Graph& g, NodeId x, int maxl) {
  Labels out;
  if (!g.has_node(x)) return out;
  auto dist = bfs_distances(g, x);
  for (NodeId a : g.nodes()) {
    if (dist[a] < 0 || dist[a] > maxl) continue;
    for (NodeId b : g.neighbors(a)) {
      Edge e = make_edge(a, b);
      auto it = out.find(e);
      if (it == out.end() || it->second > dist[a]) out[e] = dist[a];
    }
  }
  return out;
}

std::vector<char> encode_view(const ViewLayout& lay, NodeId x, const Labels& labels) {
  std::vector<char> bits(lay.P, 0);
  for (auto [e, l] : labels) {
    if (l == 0) {
      NodeId y = e.first == x ? e.second : e.first;
      bits[lay.inc_pos(x, y)] = 1;
    } else if (l <= lay.t - 1 && lay.wl > 0) {
      int base = lay.inc_len + lay.rank(x, e.first, e.second) * lay.wl;
      for (int k = 0; k < lay.wl; ++k) bits[base + k] = (l >> (lay.wl - 1 - k)) & 1;
    }
  }
  return bits;
}

// Labels as reported by x (x's own frame).
void decode_view(const ViewLayout& lay, NodeId x, const std::vector<char>& bits,
                 const std::function<void(const Edge&, int)>& sink) {
  for (int pos = 0; pos < lay.inc_len; ++pos)
    if (bits[pos]) {
      NodeId y = lay.inc_id(x, pos);
      if (y != x) sink(make_edge(x, y), 0);
    }
  if (lay.wl == 0) return;
  int m = lay.n - 1, rk = 0;
  for (int ia = 0; ia < m; ++ia)
    for (int ib = ia + 1; ib < m; ++ib, ++rk) {
      int base = lay.inc_len + rk * lay.wl, l = 0;
      for (int k = 0; k < lay.wl; ++k) l = (l << 1) | bits[base + k];
      if (l == 0) continue;
      NodeId a = ia + 1 + (ia + 1 >= x ? 1 : 0), b = ib + 1 + (ib + 1 >= x ? 1 : 0);
      sink(make_edge(a, b), l);
    }
}

class ViewNode : public NodeState {
 public:
  ViewNode(NodeId self, std::shared_ptr<const ViewLayout> lay, const Graph& h, std::shared_ptr<const Graph> g0,
           bool from_g0)
      : self_(self), lay_(std::move(lay)), h_(h) {
    if (from_g0) {
      for (NodeId x : g0_neighbors(*g0, self_))
        recv_[x] = encode_view(*lay_, x, labels_from_graph(*g0, x, lay_->t - 1));
      nbrs_ = g0_neighbors(*g0, self_);
    }
    dirty_ = true;
  }

  Outbox send(const NodeView& view, int round) override {
    sync_neighbors(view);
    refresh();
    auto bits = encode_view(*lay_, self_, own_);
    int j = round % lay_->L;
    BitString blk;
    for (int k = j * lay_->bb; k < (j + 1) * lay_->bb; ++k) blk.push(k < lay_->P ? bits[k] : false);
    Outbox out;
    for (NodeId x : view.cur_neighbors) out[x] = blk;
    return out;
  }

  Output receive(const NodeView& view, int round) override {
    int j = round % lay_->L;
    for (NodeId x : view.cur_neighbors) {
      const BitString* m = view.msg(x);
      if (!m) continue;
      auto& store = recv_[x];
      if (store.empty()) store.assign(lay_->P, 0);
      for (int k = 0; k < lay_->bb; ++k) {
        int pos = j * lay_->bb + k;
        if (pos >= lay_->P) break;
        char b = k < static_cast<int>(m->size()) ? (*m)[k] : 0;
        if (store[pos] != b) {
          store[pos] = b;
          dirty_ = true;
        }
      }
    }
    refresh();
    return listed_;
  }

  nlohmann::json debug() const override {
    nlohmann::json es = nlohmann::json::array();
    for (auto [e, l] : own_)
      if (l <= lay_->t) es.push_back({e.first, e.second});
    return {{"view", es}};
  }

 private:
  void sync_neighbors(const NodeView& view) {
    std::vector<NodeId> cur(view.cur_neighbors.begin(), view.cur_neighbors.end());
    if (cur == nbrs_) return;
    for (auto it = recv_.begin(); it != recv_.end();)
      it = std::binary_search(cur.begin(), cur.end(), it->first) ? std::next(it) : recv_.erase(it);
    nbrs_ = std::move(cur);
    dirty_ = true;
  }

  void refresh() {
    if (!dirty_) return;
    dirty_ = false;
    own_.clear();
    for (NodeId y : nbrs_) own_[make_edge(self_, y)] = 0;
    for (const auto& [x, bits] : recv_) {
      if (bits.empty()) continue;
      decode_view(*lay_, x, bits, [&](const Edge& e, int l) {
        if (l + 1 > lay_->t) return;
        auto it = own_.find(e);
        if (it == own_.end() || it->second > l + 1) own_[e] = l + 1;
      });
    }
    std::vector<Edge> es;
    for (auto [e, l] : own_) es.push_back(e);
    listed_.clear();
    for (auto& c : copies_in_edges(lay_->n, es, h_))
      if (copy_has_node(c, self_)) listed_.insert(c);
  }

  NodeId self_;
  std::shared_ptr<const ViewLayout> lay_;
  const Graph& h_;
  std::vector<NodeId> nbrs_;
  std::map<NodeId, std::vector<char>> recv_;
  Labels own_;
  CopySet listed_;
  bool dirty_ = true;
};

class ViewProtocol : public Protocol {
 public:
  ViewProtocol(std::string name, const Graph& h, std::shared_ptr<const ViewLayout> lay)
      : name_(std::move(name)), h_(h), lay_(std::move(lay)) {}
  std::string name() const override { return name_; }
  Problem problem() const override { return Problem::MemList; }
  ChangeModel supports() const override {
    return {ChangeType::EdgeIns, ChangeType::EdgeDel, ChangeType::NodeIns, ChangeType::NodeDel};
  }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph> g0) const override {
    return std::make_unique<ViewNode>(self, lay_, h_, std::move(g0), true);
  }
  std::unique_ptr<NodeState> init_inserted(NodeId self, int, const std::vector<NodeId>&,
                                           std::shared_ptr<const Graph> g0, int) const override {
    return std::make_unique<ViewNode>(self, lay_, h_, std::move(g0), false);
  }

 private:
  std::string name_;
  Graph h_;
  std::shared_ptr<const ViewLayout> lay_;
};

}  // namespace

int view_payload_bits(int n, int t, bool bitmap_only) { return ViewLayout(n, t, bitmap_only, 1).P; }

std::unique_ptr<Protocol> memlist_multipartite(const Graph& h, int n, int r) {
  if (!is_complete_multipartite(h)) throw std::invalid_argument("memlist_multipartite: target is not complete multipartite");
  if (r < 1) throw std::invalid_argument("memlist_multipartite: r must be positive");
  return std::make_unique<ViewProtocol>("memlist_multipartite", h, std::make_shared<ViewLayout>(n, 1, true, r));
}

std::unique_ptr<Protocol> memlist_general(const Graph& h, int n, int r) {
  int t = params(h).r_H;
  if (r < t)
    throw std::invalid_argument("memlist_general: r = " + std::to_string(r) + " is below r_H = " + std::to_string(t));
  return std::make_unique<ViewProtocol>("memlist_general", h, std::make_shared<ViewLayout>(n, t, false, r / t));
}

namespace {

// ---------------------------------------------------------------------------
// Deletion floods. An element ID (edge: 2L bits, node: L bits) travels
// `hops` hops; each hop takes F = floor(r/hops) rounds, one block per round
// framed as [hop][block index][slice].

struct FloodShape {
  int n = 0;
  int hops = 0;
  int F = 1;
  int id_bits = 0;
  int hop_bits() const { return ceil_log2(static_cast<std::uint64_t>(std::max(1, hops))); }
  int index_bits() const { return ceil_log2(static_cast<std::uint64_t>(F)); }
  int block_bits() const { return div_ceil(id_bits, F); }
};

class FloodNode : public NodeState {
 public:
  FloodNode(NodeId self, FloodShape spec, bool edges, CopySet initial)
      : self_(self), s_(spec), edges_(edges), listed_(std::move(initial)) {}

  Outbox send(const NodeView& view, int round) override {
    // Locally visible deletions start a flood at hop 0.
    auto lost = view.lost_neighbors();
    if (!lost.empty()) {
      if (edges_) {
        for (NodeId y : lost) learn_edge(make_edge(self_, y), 0, round);
      } else {
        for (NodeId y : lost) learn_node(y, 0, round);
      }
    }
    Outbox out;
    if (outgoing_.empty()) return out;
    auto& job = outgoing_.front();
    if (round < job.start) return out;
    int k = round - job.start;
    BitString blk;
    blk.append(static_cast<std::uint64_t>(job.hop), s_.hop_bits());
    blk.append(static_cast<std::uint64_t>(k), s_.index_bits());
    blk.append(job.payload.slice(static_cast<std::size_t>(k) * s_.block_bits(), s_.block_bits()));
    for (NodeId x : view.cur_neighbors) out[x] = blk;
    if (k + 1 == s_.F) outgoing_.erase(outgoing_.begin());
    return out;
  }

  Output receive(const NodeView& view, int round) override {
    for (NodeId x : view.cur_neighbors) {
      const BitString* m = view.msg(x);
      if (!m) continue;
      BitReader rd(*m);
      int hop = static_cast<int>(rd.read(s_.hop_bits()));
      int k = static_cast<int>(rd.read(s_.index_bits()));
      auto& acc = partial_[x];
      if (k == 0) acc = BitString();
      for (int i = 0; i < s_.block_bits(); ++i) acc.push(rd.bit());
      if (k + 1 < s_.F) continue;
      BitReader pr(acc);
      if (edges_) {
        NodeId a = read_id(pr, s_.n), b = read_id(pr, s_.n);
        learn_edge(make_edge(a, b), hop + 1, round + 1);
      } else {
        learn_node(read_id(pr, s_.n), hop + 1, round + 1);
      }
      partial_.erase(x);
    }
    return listed_;
  }

  nlohmann::json debug() const override { return {{"listed", listed_.size()}}; }

 private:
  struct Job {
    int start;
    int hop;
    BitString payload;
  };

  void queue(int hop, BitString payload, int start) {
    if (hop >= s_.hops) return;
    outgoing_.push_back({start, hop, std::move(payload)});
  }

  void learn_edge(const Edge& e, int hop, int start) {
    if (!seen_edges_.insert(e).second) return;
    std::erase_if(listed_, [&](const Copy& c) { return copy_has_edge(c, e); });
    BitString p = id_bits(e.first, s_.n);
    p.append(id_bits(e.second, s_.n));
    queue(hop, std::move(p), start);
  }

  void learn_node(NodeId v, int hop, int start) {
    if (!seen_nodes_.insert(v).second) return;
    std::erase_if(listed_, [&](const Copy& c) { return copy_has_node(c, v); });
    queue(hop, id_bits(v, s_.n), start);
  }

  NodeId self_;
  FloodShape s_;
  bool edges_;
  CopySet listed_;
  std::set<Edge> seen_edges_;
  std::set<NodeId> seen_nodes_;
  std::map<NodeId, BitString> partial_;
  std::vector<Job> outgoing_;
};

class FloodProtocol : public Protocol {
 public:
  FloodProtocol(std::string name, const Graph& h, FloodShape s, bool edges)
      : name_(std::move(name)), h_(h), s_(s), edges_(edges) {}
  std::string name() const override { return name_; }
  Problem problem() const override { return Problem::MemList; }
  ChangeModel supports() const override { return {edges_ ? ChangeType::EdgeDel : ChangeType::NodeDel}; }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph> g0) const override {
    return std::make_unique<FloodNode>(self, s_, edges_, copies_containing(*g0, h_, self));
  }
  // Outside the deletion model; only used when an attack replays insertions.
  std::unique_ptr<NodeState> init_inserted(NodeId self, int, const std::vector<NodeId>&, std::shared_ptr<const Graph>,
                                           int) const override {
    return std::make_unique<FloodNode>(self, s_, edges_, CopySet{});
  }

 private:
  std::string name_;
  Graph h_;
  FloodShape s_;
  bool edges_;
};

}  // namespace

int flood_header_bits(int hops, int r) {
  FloodShape s;
  s.hops = hops;
  s.F = hops > 0 ? std::max(1, r / hops) : 1;
  return s.hop_bits() + s.index_bits();
}

std::unique_ptr<Protocol> memlist_edge_del(const Graph& h, int n, int r) {
  int t = params(h).r_H;
  if (r < t) throw std::invalid_argument("memlist_edge_del: r is below r_H = " + std::to_string(t));
  FloodShape s{n, t, r / t, 2 * id_width(n)};
  return std::make_unique<FloodProtocol>("memlist_edge_del", h, s, true);
}

std::unique_ptr<Protocol> memlist_node_del(const Graph& h, int n, int r) {
  int t = params(h).r_H_prime;
  if (r < t) throw std::invalid_argument("memlist_node_del: r is below r_H' = " + std::to_string(t));
  FloodShape s{n, t, t > 0 ? r / t : 1, id_width(n)};
  return std::make_unique<FloodProtocol>("memlist_node_del", h, s, false);
}

namespace {

// ---------------------------------------------------------------------------
// Membership detection.

class StarNode : public NodeState {
 public:
  StarNode(int s) : s_(s) {}
  Outbox send(const NodeView& view, int) override {
    BitString b;
    b.push(static_cast<int>(view.cur_neighbors.size()) >= s_);
    Outbox out;
    for (NodeId x : view.cur_neighbors) out[x] = b;
    return out;
  }
  Output receive(const NodeView& view, int) override {
    if (static_cast<int>(view.cur_neighbors.size()) >= s_) return true;
    for (NodeId x : view.cur_neighbors) {
      const BitString* m = view.msg(x);
      if (m && !m->empty() && (*m)[0]) return true;
    }
    return false;
  }

 private:
  int s_;
};

class StarProtocol : public Protocol {
 public:
  explicit StarProtocol(int s) : s_(s) {}
  std::string name() const override { return "memdetect_star"; }
  Problem problem() const override { return Problem::MemDetect; }
  ChangeModel supports() const override {
    return {ChangeType::EdgeIns, ChangeType::EdgeDel, ChangeType::NodeIns, ChangeType::NodeDel};
  }
  std::unique_ptr<NodeState> init(NodeId, int, std::shared_ptr<const Graph>) const override {
    return std::make_unique<StarNode>(s_);
  }
  std::unique_ptr<NodeState> init_inserted(NodeId, int, const std::vector<NodeId>&, std::shared_ptr<const Graph>,
                                           int) const override {
    return std::make_unique<StarNode>(s_);
  }

 private:
  int s_;
};

// Each initial copy has a central node (min-ID node adjacent to the rest of
// the copy), which sees every deletion that kills the copy. It tells a
// fringe node with one bit once the last copy pairing them is gone.
class Rad1Node : public NodeState {
 public:
  Rad1Node(NodeId self, const CopySet& mine) : self_(self) {
    for (const auto& c : mine) {
      NodeId z = copy_lister(c, false);
      if (z == self_)
        registry_.insert(c);
      else
        alive_.insert(z);
    }
  }

  Outbox send(const NodeView& view, int) override {
    Outbox out;
    auto lost = view.lost_neighbors();
    if (lost.empty()) return out;
    for (NodeId y : lost) alive_.erase(y);
    auto before = fringe();
    std::erase_if(registry_, [&](const Copy& c) {
      for (NodeId y : lost)
        if (copy_has_node(c, y)) return true;
      return false;
    });
    auto after = fringe();
    BitString one;
    one.push(true);
    for (NodeId f : before)
      if (!after.count(f) && view.has(f)) out[f] = one;
    return out;
  }

  Output receive(const NodeView& view, int) override {
    for (NodeId x : view.cur_neighbors)
      if (view.msg(x)) alive_.erase(x);
    return !registry_.empty() || !alive_.empty();
  }

  nlohmann::json debug() const override { return {{"registry", registry_.size()}, {"centrals", alive_}}; }

 private:
  std::set<NodeId> fringe() const {
    std::set<NodeId> out;
    for (const auto& c : registry_)
      for (NodeId x : copy_nodes(c))
        if (x != self_) out.insert(x);
    return out;
  }

  NodeId self_;
  CopySet registry_;
  std::set<NodeId> alive_;  // central nodes still pairing us in a copy
};

class Rad1Protocol : public Protocol {
 public:
  explicit Rad1Protocol(const Graph& h) : h_(h) {}
  std::string name() const override { return "memdetect_rad1_node_del"; }
  Problem problem() const override { return Problem::MemDetect; }
  ChangeModel supports() const override { return {ChangeType::NodeDel}; }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph> g0) const override {
    return std::make_unique<Rad1Node>(self, copies_containing(*g0, h_, self));
  }

 private:
  Graph h_;
};

// Does g[S] contain a complete multipartite graph with these part sizes?
bool hosts_multipartite(const Graph& g, const std::vector<NodeId>& S, std::vector<int> sizes) {
  int total = 0;
  for (int x : sizes) total += x;
  if (total != static_cast<int>(S.size())) return false;
  std::vector<int> part(S.size(), -1);
  std::function<bool(std::size_t)> go = [&](std::size_t k) {
    if (k == S.size()) return true;
    for (std::size_t p = 0; p < sizes.size(); ++p) {
      if (sizes[p] == 0) continue;
      bool ok = true;
      for (std::size_t j = 0; j < k && ok; ++j)
        if (part[j] != static_cast<int>(p) && !g.has_edge(S[j], S[k])) ok = false;
      if (!ok) continue;
      part[k] = static_cast<int>(p);
      --sizes[p];
      if (go(k + 1)) return true;
      ++sizes[p];
      part[k] = -1;
    }
    return false;
  };
  return go(0);
}

struct CountEntry {
  int count = 0;
  int need = -1;  // smallest |S_i|-1 over parts i that S can complete; -1 if none
};

class CountNode : public NodeState {
 public:
  CountNode(NodeId self, const Graph& h, const Parts& parts, const Graph& g0) {
    if (!g0.has_node(self)) return;
    const auto& nb = g0.neighbors(self);
    int kmax = h.node_count() - 1;
    std::vector<NodeId> S;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
      if (!S.empty()) {
        CountEntry e;
        e.count = common_count(g0, self, S);
        for (std::size_t i = 0; i < parts.size(); ++i) {
          int si = static_cast<int>(parts[i].size());
          if (static_cast<int>(S.size()) != h.node_count() - si) continue;
          std::vector<int> sizes;
          for (std::size_t j = 0; j < parts.size(); ++j)
            if (j != i) sizes.push_back(static_cast<int>(parts[j].size()));
          if (hosts_multipartite(g0, S, sizes) && (e.need < 0 || si - 1 < e.need)) e.need = si - 1;
        }
        table_[S] = e;
      }
      if (static_cast<int>(S.size()) == kmax) return;
      for (std::size_t k = from; k < nb.size(); ++k) {
        S.push_back(nb[k]);
        rec(k + 1);
        S.pop_back();
      }
    };
    rec(0);
  }

  Outbox send(const NodeView& view, int) override {
    Outbox out;
    auto lost = view.lost_neighbors();
    if (lost.empty()) return out;
    std::erase_if(table_, [&](const auto& kv) {
      for (NodeId y : lost)
        if (std::binary_search(kv.first.begin(), kv.first.end(), y)) return true;
      return false;
    });
    BitString del;
    del.push(true);
    for (NodeId x : view.cur_neighbors) out[x] = del;
    return out;
  }

  Output receive(const NodeView& view, int) override {
    std::vector<NodeId> D;
    for (NodeId x : view.cur_neighbors)
      if (view.msg(x)) D.push_back(x);
    if (!D.empty())
      for (auto& [S, e] : table_)
        if (std::includes(D.begin(), D.end(), S.begin(), S.end())) --e.count;
    for (const auto& [S, e] : table_)
      if (e.need >= 0 && e.count >= e.need) return true;
    return false;
  }

  nlohmann::json debug() const override {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [S, e] : table_) rows.push_back({{"S", S}, {"count", e.count}});
    return {{"counts", rows}};
  }

 private:
  std::map<std::vector<NodeId>, CountEntry> table_;
};

class CountProtocol : public Protocol {
 public:
  CountProtocol(const Graph& h, Parts parts) : h_(h), parts_(std::move(parts)) {}
  std::string name() const override { return "memdetect_multipartite_node_del"; }
  Problem problem() const override { return Problem::MemDetect; }
  ChangeModel supports() const override { return {ChangeType::NodeDel}; }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph> g0) const override {
    return std::make_unique<CountNode>(self, h_, parts_, *g0);
  }

 private:
  Graph h_;
  Parts parts_;
};

// ---------------------------------------------------------------------------
// Listing under deletions. Each initial copy has one lister, computed by
// everybody from G^0; the lister drops copies as it learns of deletions.

enum class Notice { None, Del, EdgeId, NodeId };

class ListerNode : public NodeState {
 public:
  ListerNode(NodeId self, int n, bool edges, Notice notice, CopySet mine)
      : self_(self), n_(n), edges_(edges), notice_(notice), listed_(std::move(mine)) {}

  Outbox send(const NodeView& view, int) override {
    Outbox out;
    auto lost = view.lost_neighbors();
    for (NodeId y : lost) {
      if (edges_)
        drop_edge(make_edge(self_, y));
      else
        drop_node(y);
    }
    if (lost.empty() || notice_ == Notice::None) return out;
    BitString m;
    if (notice_ == Notice::Del) {
      m.push(true);
    } else if (notice_ == Notice::EdgeId) {
      Edge e = make_edge(self_, lost.front());
      m.append(id_bits(e.first, n_));
      m.append(id_bits(e.second, n_));
    } else {
      m.append(id_bits(lost.front(), n_));
    }
    for (NodeId x : view.cur_neighbors) out[x] = m;
    return out;
  }

  Output receive(const NodeView& view, int) override {
    std::vector<NodeId> dels;
    for (NodeId x : view.cur_neighbors) {
      const BitString* m = view.msg(x);
      if (!m) continue;
      BitReader r(*m);
      if (notice_ == Notice::Del) {
        dels.push_back(x);
      } else if (notice_ == Notice::EdgeId) {
        NodeId a = read_id(r, n_), b = read_id(r, n_);
        drop_edge(make_edge(a, b));
      } else {
        drop_node(read_id(r, n_));
      }
    }
    // One change per round: two Del senders are the two endpoints.
    if (dels.size() == 2) drop_edge(make_edge(dels[0], dels[1]));
    return listed_;
  }

 private:
  void drop_edge(const Edge& e) {
    std::erase_if(listed_, [&](const Copy& c) { return copy_has_edge(c, e); });
  }
  void drop_node(NodeId v) {
    std::erase_if(listed_, [&](const Copy& c) { return copy_has_node(c, v); });
  }

  NodeId self_;
  int n_;
  bool edges_;
  Notice notice_;
  CopySet listed_;
};

class ListerProtocol : public Protocol {
 public:
  ListerProtocol(std::string name, const Graph& h, int n, ChangeType model, bool node_edge_center, Notice notice)
      : name_(std::move(name)), h_(h), n_(n), model_(model), ne_(node_edge_center), notice_(notice) {}
  std::string name() const override { return name_; }
  Problem problem() const override { return Problem::List; }
  ChangeModel supports() const override { return {model_}; }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph> g0) const override {
    CopySet mine;
    for (auto& c : copies_containing(*g0, h_, self))
      if (copy_lister(c, ne_) == self) mine.insert(c);
    return std::make_unique<ListerNode>(self, n_, model_ == ChangeType::EdgeDel, notice_, std::move(mine));
  }

 private:
  std::string name_;
  Graph h_;
  int n_;
  ChangeType model_;
  bool ne_;
  Notice notice_;
};

void require_deletion(ChangeType m, const char* who) {
  if (m != ChangeType::EdgeDel && m != ChangeType::NodeDel)
    throw std::invalid_argument(std::string(who) + ": model must be edge_del or node_del");
}

}  // namespace

NodeId copy_lister(const Copy& c, bool node_edge) {
  auto [g, ns] = relabel(c);
  auto p = params(g);
  const auto& cs = node_edge ? p.ne_center : p.center;
  return ns[*std::min_element(cs.begin(), cs.end()) - 1];
}

int common_count(const Graph& g, NodeId v, const std::vector<NodeId>& S) {
  if (S.empty()) return 0;
  int c = 0;
  for (NodeId x : g.neighbors(S.front())) {
    if (x == v || std::find(S.begin(), S.end(), x) != S.end()) continue;
    bool all = true;
    for (std::size_t k = 1; k < S.size() && all; ++k) all = g.has_edge(x, S[k]);
    if (all) ++c;
  }
  return c;
}

std::unique_ptr<Protocol> memdetect_star(const Graph& h) {
  if (!is_star(h)) throw std::invalid_argument("memdetect_star: target is not a star");
  return std::make_unique<StarProtocol>(h.node_count() - 1);
}

std::unique_ptr<Protocol> memdetect_rad1_node_del(const Graph& h) {
  if (params(h).rad != 1) throw std::invalid_argument("memdetect_rad1_node_del: target radius is not 1");
  return std::make_unique<Rad1Protocol>(h);
}

std::unique_ptr<Protocol> memdetect_multipartite_node_del(const Graph& h) {
  auto parts = multipartite_parts(h);
  if (!parts || !is_connected(h))
    throw std::invalid_argument("memdetect_multipartite_node_del: target is not connected complete multipartite");
  return std::make_unique<CountProtocol>(h, *parts);
}

std::unique_ptr<Protocol> list_star_del(const Graph& h, ChangeType model) {
  require_deletion(model, "list_star_del");
  auto p = params(h);
  if (model == ChangeType::EdgeDel && p.ne_rad != 1)
    throw std::invalid_argument("list_star_del: edge deletions need node-edge radius 1");
  if (model == ChangeType::NodeDel && p.rad != 1) throw std::invalid_argument("list_star_del: node deletions need radius 1");
  return std::make_unique<ListerProtocol>("list_star_del", h, h.id_range(), model, false, Notice::None);
}

std::unique_ptr<Protocol> list_rad1_edge_del(const Graph& h) {
  auto p = params(h);
  if (p.ne_rad != 2 || p.rad != 1)
    throw std::invalid_argument("list_rad1_edge_del: needs radius 1 and node-edge radius 2");
  return std::make_unique<ListerProtocol>("list_rad1_edge_del", h, h.id_range(), ChangeType::EdgeDel, false,
                                          Notice::Del);
}

std::unique_ptr<Protocol> list_center_del(const Graph& h, int n, ChangeType model) {
  require_deletion(model, "list_center_del");
  auto p = params(h);
  bool edges = model == ChangeType::EdgeDel;
  if (edges && p.ne_rad != 2) throw std::invalid_argument("list_center_del: edge deletions need node-edge radius 2");
  if (!edges && p.rad != 2) throw std::invalid_argument("list_center_del: node deletions need radius 2");
  return std::make_unique<ListerProtocol>("list_center_del", h, n, model, edges,
                                          edges ? Notice::EdgeId : Notice::NodeId);
}

}  // namespace dynsub
