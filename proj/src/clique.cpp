#include "dynsub/clique.hpp"

#include <algorithm>

#include "dynsub/blocks.hpp"

namespace dynsub {

namespace {

int div_ceil(int a, int b) { return (a + b - 1) / b; }

bool contains(const std::vector<NodeId>& sorted, NodeId x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

std::vector<NodeId> to_vec(std::span<const NodeId> s) { return {s.begin(), s.end()}; }

CopySet initial_triangles(const Graph& g0, NodeId self) {
  CopySet out;
  if (!g0.has_node(self)) return out;
  const auto& nb = g0.neighbors(self);
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j)
      if (g0.has_edge(nb[i], nb[j])) out.insert(triangle(self, nb[i], nb[j]));
  return out;
}

const std::vector<NodeId>& g0_neighbors(const Graph& g0, NodeId x) {
  static const std::vector<NodeId> kNone;
  return g0.has_node(x) ? g0.neighbors(x) : kNone;
}

void check_degree(const NodeView& view, int delta) {
  if (static_cast<int>(view.cur_neighbors.size()) > delta)
    throw SimError("degree bound " + std::to_string(delta) + " exceeded at node " + std::to_string(view.self));
}

// Neighbor-ID list: delta slots of L bits, sorted, padded with the last ID.
BitString encode_id_list(const std::vector<NodeId>& ids, int n, int delta) {
  BitString s;
  for (int k = 0; k < delta; ++k) {
    NodeId v = ids.empty() ? 1 : ids[std::min<std::size_t>(k, ids.size() - 1)];
    s.append(id_bits(v, n));
  }
  return s;
}

std::vector<NodeId> decode_id_list(const BitString& s, int n, int delta) {
  BitReader r(s);
  std::vector<NodeId> out;
  for (int k = 0; k < delta; ++k) out.push_back(read_id(r, n));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// [count][offset-1 ...]
void write_offsets(BitString& s, const std::vector<int>& offs, int count_bits, int off_bits) {
  std::size_t cap = (std::size_t{1} << count_bits) - 1;
  std::size_t k = std::min(offs.size(), cap);
  s.append(k, count_bits);
  for (std::size_t i = 0; i < k; ++i) s.append(static_cast<std::uint64_t>(offs[i] - 1), off_bits);
}

std::vector<int> read_offsets(BitReader& r, int count_bits, int off_bits) {
  int k = static_cast<int>(r.read(count_bits));
  std::vector<int> out;
  for (int i = 0; i < k; ++i) out.push_back(static_cast<int>(r.read(off_bits)) + 1);
  return out;
}

// ---------------------------------------------------------------------------
// Membership listing under edge insertions.

class MemListK3Node : public NodeState {
 public:
  MemListK3Node(NodeId self, K3Params p, std::shared_ptr<const Graph> g0)
      : self_(self), p_(p), g0_(std::move(g0)), rec_(p.d) {
    listed_ = initial_triangles(*g0_, self_);
    if (g0_->has_node(self_))
      for (NodeId w : g0_->neighbors(self_)) open(w, 1);
  }

  Outbox send(const NodeView& view, int round) override {
    check_degree(view, p_.delta);
    for (NodeId w : view.lost_neighbors()) {
      out_.erase(w);
      in_.erase(w);
    }
    fresh_ = view.new_neighbors();
    for (NodeId w : fresh_) open(w, round);
    rec_.expire(round);
    const int cb = ceil_log2(static_cast<std::uint64_t>(p_.delta) * p_.delta + 1);
    const int ob = ceil_log2(static_cast<std::uint64_t>(p_.d));
    Outbox box;
    for (NodeId w : view.cur_neighbors) {
      bool sig = !fresh_.empty();
      bool recs = contains(fresh_, w);
      BitString m;
      m.push(sig);
      m.push(recs);
      m.push(true);
      if (recs) {
        write_offsets(m, rec_.edge_offsets(round), cb, ob);
        write_offsets(m, rec_.signal_offsets(round), cb, ob);
      }
      auto& st = out_.at(w);
      if (st.period_start(round)) st.freeze(encode_id_list(to_vec(view.cur_neighbors), p_.n, p_.delta));
      m.append(st.block(round));
      box.emplace(w, std::move(m));
    }
    return box;
  }

  Output receive(const NodeView& view, int round) override {
    const int cb = ceil_log2(static_cast<std::uint64_t>(p_.delta) * p_.delta + 1);
    const int ob = ceil_log2(static_cast<std::uint64_t>(p_.d));
    std::vector<NodeId> senders;
    std::map<NodeId, std::pair<std::vector<int>, std::vector<int>>> their;
    for (const auto& [w, msg] : *view.inbox) {
      BitReader r(msg);
      bool sig = r.bit(), recs = r.bit(), blk = r.bit();
      if (sig) senders.push_back(w);
      if (recs) {
        auto e = read_offsets(r, cb, ob);
        auto s = read_offsets(r, cb, ob);
        their[w] = {e, s};
      }
      if (blk && in_.count(w) && in_[w].take(r)) known_[w] = decode_id_list(*in_[w].latest(), p_.n, p_.delta);
    }

    // Third node: both endpoints of the new edge signalled.
    if (fresh_.empty() && senders.size() == 2) listed_.insert(triangle(self_, senders[0], senders[1]));

    for (NodeId v : fresh_) {
      // Older edges known through G^0 or a completed neighbor list.
      for (NodeId x : view.cur_neighbors)
        if (x != v && knows_edge(x, v)) listed_.insert(triangle(self_, v, x));
      auto it = their.find(v);
      if (it == their.end()) continue;
      const auto& [v_edge, v_signal] = it->second;
      // I gained {self,x} j rounds ago and v heard a signal then: x is v's neighbor.
      for (int j : v_signal)
        if (auto* e = rec_.edge_at(round, j))
          for (NodeId x : e->nbrs)
            if (x != v) listed_.insert(triangle(self_, v, x));
      // v gained an edge j rounds ago and I heard exactly one signal then.
      for (int j : v_edge)
        if (auto* s = rec_.signal_at(round, j))
          if (s->senders.size() == 1 && s->senders[0] != v) listed_.insert(triangle(self_, v, s->senders[0]));
    }

    if (!fresh_.empty()) rec_.add_edge(round, fresh_, false);
    if (!senders.empty()) rec_.add_signal(round, senders);
    return listed_;
  }

 private:
  void open(NodeId w, int start) {
    out_[w] = BlockStream(start, p_.T, p_.delta * p_.L);
    in_[w] = BlockAssembler(p_.T, p_.delta * p_.L);
  }

  bool knows_edge(NodeId x, NodeId v) const {
    if (contains(g0_neighbors(*g0_, x), v)) return true;
    auto it = known_.find(x);
    return it != known_.end() && contains(it->second, v);
  }

  NodeId self_;
  K3Params p_;
  std::shared_ptr<const Graph> g0_;
  RecentRecords rec_;
  std::map<NodeId, BlockStream> out_;
  std::map<NodeId, BlockAssembler> in_;
  std::map<NodeId, std::vector<NodeId>> known_;
  std::vector<NodeId> fresh_;
  CopySet listed_;
};

class MemListK3 : public Protocol {
 public:
  explicit MemListK3(K3Params p) : p_(p) {}
  std::string name() const override { return "memlist_k3_edge_ins"; }
  Problem problem() const override { return Problem::MemList; }
  ChangeModel supports() const override { return {ChangeType::EdgeIns}; }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph> g0) const override {
    return std::make_unique<MemListK3Node>(self, p_, std::move(g0));
  }

 private:
  K3Params p_;
};

// ---------------------------------------------------------------------------
// Baseline membership detection.

class BaselineNode : public NodeState {
 public:
  BaselineNode(NodeId self, K3Params p, std::shared_ptr<const Graph> g0)
      : self_(self), p_(p), g0_(std::move(g0)), rec_(p.d) {
    yes_ = !initial_triangles(*g0_, self_).empty();
  }

  Outbox send(const NodeView& view, int round) override {
    check_degree(view, p_.delta);
    fresh_ = view.new_neighbors();
    rec_.expire(round);
    for (NodeId w : view.lost_neighbors()) {
      out_.erase(w);
      in_.erase(w);
    }
    for (NodeId w : fresh_) {
      out_[w] = BlockStream(round, p_.d, p_.delta * p_.L);
      out_[w].freeze(encode_id_list(to_vec(view.cur_neighbors), p_.n, p_.delta));
      in_[w] = BlockAssembler(p_.d, p_.delta * p_.L);
    }
    Outbox box;
    for (NodeId w : view.cur_neighbors) {
      bool recs = contains(fresh_, w);
      auto it = out_.find(w);
      bool blk = it != out_.end() && round < it->second.start() + p_.d;
      BitString m;
      m.push(!fresh_.empty());
      m.push(recs);
      m.push(blk);
      if (recs) {
        m.append(bitmap(rec_.edge_offsets(round)));
        m.append(bitmap(rec_.signal_offsets(round)));
        m.push(closes_known(view, w));
      }
      if (blk) m.append(it->second.block(round));
      if (!fresh_.empty() || recs || blk) box.emplace(w, std::move(m));
    }
    return box;
  }

  Output receive(const NodeView& view, int round) override {
    std::vector<NodeId> senders;
    for (const auto& [w, msg] : *view.inbox) {
      BitReader r(msg);
      bool sig = r.bit(), recs = r.bit(), blk = r.bit();
      if (sig) senders.push_back(w);
      if (recs) {
        auto e = read_bitmap(r), s = read_bitmap(r);
        bool inform = r.bit();
        auto mine_e = rec_.edge_offsets(round), mine_s = rec_.signal_offsets(round);
        if (inform || intersects(mine_e, s) || intersects(mine_s, e)) yes_ = true;
      }
      if (blk && in_.count(w) && in_[w].take(r)) known_[w] = decode_id_list(*in_[w].latest(), p_.n, p_.delta);
    }
    if (fresh_.empty() && senders.size() == 2) yes_ = true;
    for (NodeId v : fresh_)
      if (closes_known(view, v)) yes_ = true;
    if (!fresh_.empty()) rec_.add_edge(round, fresh_, false);
    if (!senders.empty()) rec_.add_signal(round, senders);
    return yes_;
  }

 private:
  BitString bitmap(const std::vector<int>& offs) const {
    std::vector<bool> bits(p_.d, false);
    for (int o : offs) bits[o - 1] = true;
    BitString s;
    for (bool b : bits) s.push(b);
    return s;
  }
  std::vector<int> read_bitmap(BitReader& r) const {
    std::vector<int> out;
    for (int i = 1; i <= p_.d; ++i)
      if (r.bit()) out.push_back(i);
    return out;
  }
  static bool intersects(const std::vector<int>& a, const std::vector<int>& b) {
    for (int x : a)
      if (std::find(b.begin(), b.end(), x) != b.end()) return true;
    return false;
  }
  bool closes_known(const NodeView& view, NodeId v) const {
    for (NodeId x : view.cur_neighbors) {
      if (x == v) continue;
      if (contains(g0_neighbors(*g0_, x), v)) return true;
      auto it = known_.find(x);
      if (it != known_.end() && contains(it->second, v)) return true;
    }
    return false;
  }

  NodeId self_;
  K3Params p_;
  std::shared_ptr<const Graph> g0_;
  RecentRecords rec_;
  std::map<NodeId, BlockStream> out_;
  std::map<NodeId, BlockAssembler> in_;
  std::map<NodeId, std::vector<NodeId>> known_;
  std::vector<NodeId> fresh_;
  bool yes_ = false;
};

class Baseline : public Protocol {
 public:
  explicit Baseline(K3Params p) : p_(p) {}
  std::string name() const override { return "baseline_memdetect_k3"; }
  Problem problem() const override { return Problem::MemDetect; }
  ChangeModel supports() const override { return {ChangeType::EdgeIns}; }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph> g0) const override {
    return std::make_unique<BaselineNode>(self, p_, std::move(g0));
  }

 private:
  K3Params p_;
};

// ---------------------------------------------------------------------------
// Listing under edge and node insertions.
//
// Header bits: Signal, Fresh (sender was inserted this round), REdge, Block.
// After Signal: one reported bit per entry of the receiver's latest DBList
// that the sender holds. REdge entries carry an offset and one kind bit
// (1 = gained a freshly inserted neighbor).

class ListK3Node : public NodeState {
 public:
  ListK3Node(NodeId self, K3Params p, std::shared_ptr<const Graph> g0, int inserted_at,
             const std::vector<NodeId>& nbrs)
      : self_(self), p_(p), g0_(std::move(g0)), rec_(p.d), inserted_at_(inserted_at) {
    W_ = ceil_log2(static_cast<std::uint64_t>(p_.L));
    cb_ = ceil_log2(static_cast<std::uint64_t>(p_.delta));
    payload_ = cb_ + (p_.delta - 1) * W_;
    if (inserted_at_ == 0) {
      listed_ = initial_triangles(*g0_, self_);
      for (NodeId w : g0_neighbors(*g0_, self_)) {
        open(w, 1);
        auto& o = out_[w];
        o.completed = others(g0_neighbors(*g0_, self_), w);
        o.has_completed = true;
        auto& i = in_[w];
        i.indices = dblist(self_, others(g0_neighbors(*g0_, w), self_));
        i.has = true;
      }
    } else {
      for (NodeId w : nbrs) open(w, inserted_at_);
      if (!nbrs.empty()) rec_.add_edge(inserted_at_, nbrs, false);
    }
  }

  Outbox send(const NodeView& view, int round) override {
    check_degree(view, p_.delta);
    for (NodeId w : view.lost_neighbors()) {
      out_.erase(w);
      in_.erase(w);
    }
    const bool born = round == inserted_at_;
    fresh_ = born ? std::vector<NodeId>{} : view.new_neighbors();
    for (NodeId w : fresh_) open(w, round);
    rec_.expire(round);
    const int ob = ceil_log2(static_cast<std::uint64_t>(p_.d));
    const int rcb = ceil_log2(static_cast<std::uint64_t>(p_.delta) + 1);
    const bool sig = !fresh_.empty();
    Outbox box;
    for (NodeId w : view.cur_neighbors) {
      bool redge = contains(fresh_, w);
      BitString m;
      m.push(sig);
      m.push(born);
      m.push(redge);
      m.push(true);
      if (sig && !redge && fresh_.size() == 1) {
        auto& i = in_.at(w);
        if (i.has) {
          BitString id = id_bits(fresh_[0], p_.n);
          for (int j : i.indices) m.push(id[j - 1]);
        }
      }
      if (redge) {
        std::vector<std::pair<int, bool>> entries;
        for (int o : rec_.edge_offsets(round)) entries.emplace_back(o, rec_.edge_at(round, o)->fresh);
        std::size_t k = std::min<std::size_t>(entries.size(), (std::size_t{1} << rcb) - 1);
        m.append(k, rcb);
        for (std::size_t e = 0; e < k; ++e) {
          m.append(static_cast<std::uint64_t>(entries[e].first - 1), ob);
          m.push(entries[e].second);
        }
      }
      auto& o = out_.at(w);
      if (o.bs.period_start(round)) {
        o.frozen = others(to_vec(view.cur_neighbors), w);
        o.bs.freeze(encode_dblist(dblist(w, o.frozen)));
      }
      m.append(o.bs.block(round));
      box.emplace(w, std::move(m));
    }
    return box;
  }

  Output receive(const NodeView& view, int round) override {
    const int ob = ceil_log2(static_cast<std::uint64_t>(p_.d));
    const int rcb = ceil_log2(static_cast<std::uint64_t>(p_.delta) + 1);
    const bool born = round == inserted_at_;
    std::vector<NodeId> senders;
    std::set<NodeId> fresh_senders;
    std::map<NodeId, BitString> reports;
    std::map<NodeId, std::vector<std::pair<int, bool>>> their_edges;
    for (const auto& [w, msg] : *view.inbox) {
      BitReader r(msg);
      bool sig = r.bit(), fresh = r.bit(), redge = r.bit(), blk = r.bit();
      if (sig) senders.push_back(w);
      if (fresh) fresh_senders.insert(w);
      bool w_new = view.gained(w);
      if (sig && !w_new) {
        auto it = out_.find(w);
        if (it != out_.end() && it->second.has_completed) {
          BitString rep;
          for (std::size_t k = 0; k < it->second.completed.size(); ++k) rep.push(r.bit());
          reports[w] = rep;
        }
      }
      if (redge) {
        int k = static_cast<int>(r.read(rcb));
        auto& v = their_edges[w];
        for (int e = 0; e < k; ++e) {
          int off = static_cast<int>(r.read(ob)) + 1;
          v.emplace_back(off, r.bit());
        }
      }
      if (blk) {
        auto it = in_.find(w);
        if (it != in_.end() && it->second.as.take(r)) {
          it->second.indices = decode_dblist(*it->second.as.latest());
          it->second.has = true;
        }
      }
    }

    if (!born) {
      // A node joined next to me and next to an old neighbor that signalled.
      if (fresh_.size() == 1) {
        NodeId z = fresh_[0];
        for (NodeId x : senders)
          if (x != z && !view.gained(x)) listed_.insert(triangle(self_, x, z));
      }
      // Two neighbors signalled and reported different bits: they are now adjacent.
      if (fresh_.empty() && senders.size() == 2) {
        NodeId u = senders[0], v = senders[1];
        auto bu = reported(reports, u, v), bv = reported(reports, v, u);
        if (bu && bv && *bu != *bv) listed_.insert(triangle(self_, u, v));
      }
      // New edge to an old node: infer the third node from recent records.
      if (fresh_.size() == 1 && !fresh_senders.count(fresh_[0])) {
        NodeId v = fresh_[0];
        for (auto [j, kind_fresh] : their_edges[v]) {
          if (!kind_fresh) {
            if (auto* s = rec_.signal_at(round, j))
              for (NodeId x : s->senders)
                if (x != v && view.has(x)) listed_.insert(triangle(self_, v, x));
          } else if (auto* e = rec_.edge_at(round, j); e && e->fresh) {
            for (NodeId z : e->nbrs)
              if (z != v && view.has(z)) listed_.insert(triangle(self_, v, z));
          }
        }
      }
      if (!fresh_.empty()) {
        bool f = fresh_.size() == 1 && fresh_senders.count(fresh_[0]);
        rec_.add_edge(round, fresh_, f);
      }
    }
    if (!senders.empty()) rec_.add_signal(round, senders);

    for (auto& [w, o] : out_)
      if (o.bs.period_end(round)) {
        o.completed = o.frozen;
        o.has_completed = true;
      }
    return listed_;
  }

 private:
  struct Out {
    BlockStream bs;
    std::vector<NodeId> frozen;
    std::vector<NodeId> completed;
    bool has_completed = false;
  };
  struct In {
    BlockAssembler as;
    std::vector<int> indices;
    bool has = false;
  };

  void open(NodeId w, int start) {
    out_[w] = Out{BlockStream(start, p_.T, payload_), {}, {}, false};
    in_[w] = In{BlockAssembler(p_.T, payload_), {}, false};
  }

  static std::vector<NodeId> others(const std::vector<NodeId>& nbrs, NodeId skip) {
    std::vector<NodeId> out;
    for (NodeId x : nbrs)
      if (x != skip) out.push_back(x);
    return out;
  }

  std::vector<int> dblist(NodeId target, const std::vector<NodeId>& rest) const {
    BitString t = id_bits(target, p_.n);
    std::vector<int> out;
    for (NodeId x : rest) out.push_back(one_distinct_bit(t, id_bits(x, p_.n)));
    return out;
  }

  BitString encode_dblist(const std::vector<int>& idx) const {
    BitString s;
    s.append(idx.size(), cb_);
    for (int k = 0; k < p_.delta - 1; ++k)
      s.append(k < static_cast<int>(idx.size()) ? static_cast<std::uint64_t>(idx[k] - 1) : 0, W_);
    return s;
  }

  std::vector<int> decode_dblist(const BitString& s) const {
    BitReader r(s);
    int k = std::min(static_cast<int>(r.read(cb_)), p_.delta - 1);
    std::vector<int> out;
    for (int i = 0; i < p_.delta - 1; ++i) {
      int v = static_cast<int>(r.read(W_)) + 1;
      if (i < k) out.push_back(v);
    }
    return out;
  }

  // Bit that `from` reported for neighbor `about` of mine.
  std::optional<bool> reported(const std::map<NodeId, BitString>& reports, NodeId from, NodeId about) const {
    auto rit = reports.find(from);
    auto oit = out_.find(from);
    if (rit == reports.end() || oit == out_.end()) return std::nullopt;
    const auto& c = oit->second.completed;
    auto pos = std::find(c.begin(), c.end(), about);
    if (pos == c.end()) return std::nullopt;
    std::size_t k = static_cast<std::size_t>(pos - c.begin());
    if (k >= rit->second.size()) return std::nullopt;
    return rit->second[k];
  }

  NodeId self_;
  K3Params p_;
  std::shared_ptr<const Graph> g0_;
  RecentRecords rec_;
  int inserted_at_;
  int W_ = 0, cb_ = 0, payload_ = 0;
  std::map<NodeId, Out> out_;
  std::map<NodeId, In> in_;
  std::vector<NodeId> fresh_;
  CopySet listed_;
};

class ListK3 : public Protocol {
 public:
  explicit ListK3(K3Params p) : p_(p) {}
  std::string name() const override { return "list_k3_mixed_ins"; }
  Problem problem() const override { return Problem::List; }
  ChangeModel supports() const override { return {ChangeType::EdgeIns, ChangeType::NodeIns}; }
  std::unique_ptr<NodeState> init(NodeId self, int, std::shared_ptr<const Graph> g0) const override {
    return std::make_unique<ListK3Node>(self, p_, std::move(g0), 0, std::vector<NodeId>{});
  }
  std::unique_ptr<NodeState> init_inserted(NodeId self, int, const std::vector<NodeId>& nbrs,
                                           std::shared_ptr<const Graph> g0, int round) const override {
    return std::make_unique<ListK3Node>(self, p_, std::move(g0), round, nbrs);
  }

 private:
  K3Params p_;
};

}  // namespace

Copy triangle(NodeId a, NodeId b, NodeId c) { return canon({make_edge(a, b), make_edge(a, c), make_edge(b, c)}); }

K3Params memlist_k3_params(int n, int delta) {
  K3Params p;
  p.n = n;
  p.delta = delta;
  p.L = id_width(n);
  p.d = std::max(2, ceil_log2(static_cast<std::uint64_t>(n)));
  p.T = std::max(1, p.d / 2);
  return p;
}

K3Params list_k3_params(int n, int delta) {
  K3Params p;
  p.n = n;
  p.delta = delta;
  p.L = id_width(n);
  p.d = std::max(2, ceil_log2(static_cast<std::uint64_t>(ceil_log2(static_cast<std::uint64_t>(n)))));
  p.T = std::max(1, p.d / 2);
  return p;
}

int memlist_k3_bound(int n, int delta) {
  auto p = memlist_k3_params(n, delta);
  int lg_d = ceil_log2(static_cast<std::uint64_t>(p.d));
  int header = 3 + ceil_log2(static_cast<std::uint64_t>(p.T));
  return 1 + (delta + delta * delta) * (lg_d + 1) + div_ceil(delta * p.L, p.T) + header;
}

int list_k3_bound(int n, int delta) {
  auto p = list_k3_params(n, delta);
  int W = ceil_log2(static_cast<std::uint64_t>(p.L));
  int lg_d = ceil_log2(static_cast<std::uint64_t>(p.d));
  int header = 4 + ceil_log2(static_cast<std::uint64_t>(delta) + 1) + ceil_log2(static_cast<std::uint64_t>(p.T)) +
               div_ceil(ceil_log2(static_cast<std::uint64_t>(delta)), p.T);
  return 1 + (delta - 1) * (1 + W) + delta * (lg_d + 1) + div_ceil((delta - 1) * W, p.T) + header;
}

std::unique_ptr<Protocol> baseline_memdetect_k3(int n, int delta, int d) {
  auto p = memlist_k3_params(n, delta);
  p.d = std::max(1, d);
  return std::make_unique<Baseline>(p);
}

std::unique_ptr<Protocol> memlist_k3_edge_ins(int n, int delta) {
  return std::make_unique<MemListK3>(memlist_k3_params(n, delta));
}

std::unique_ptr<Protocol> list_k3_mixed_ins(int n, int delta) {
  return std::make_unique<ListK3>(list_k3_params(n, delta));
}

}  // namespace dynsub
