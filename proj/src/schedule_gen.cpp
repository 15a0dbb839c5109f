#include "dynsub/schedule_gen.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace dynsub {

namespace {

class Gen {
 public:
  Gen(const GenConfig& c, Graph g) : c_(c), g_(std::move(g)), rng_(c.seed) {
    std::vector<NodeId> ids(c_.n);
    for (int i = 0; i < c_.n; ++i) ids[i] = i + 1;
    if (c_.hot > 0 && c_.hot < c_.n) {
      std::shuffle(ids.begin(), ids.end(), rng_);
      ids.resize(c_.hot);
      std::sort(ids.begin(), ids.end());
    }
    hot_ = ids;
  }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }
  bool room(NodeId v) const { return g_.degree(v) < c_.delta; }

  std::vector<NodeId> present_hot() const {
    std::vector<NodeId> out;
    for (NodeId v : hot_)
      if (g_.has_node(v)) out.push_back(v);
    return out;
  }

  std::optional<Event> edge_ins() {
    auto live = present_hot();
    if (live.size() < 2) return std::nullopt;
    if (coin(c_.close_bias)) {
      for (int tries = 0; tries < 20; ++tries) {
        NodeId x = live[pick(0, static_cast<int>(live.size()) - 1)];
        const auto& nb = g_.neighbors(x);
        if (nb.size() < 2) continue;
        NodeId a = nb[pick(0, static_cast<int>(nb.size()) - 1)], b = nb[pick(0, static_cast<int>(nb.size()) - 1)];
        if (a != b && !g_.has_edge(a, b) && room(a) && room(b)) return Event::edge_ins(a, b);
      }
    }
    for (int tries = 0; tries < 50; ++tries) {
      NodeId a = live[pick(0, static_cast<int>(live.size()) - 1)], b = live[pick(0, static_cast<int>(live.size()) - 1)];
      if (a != b && !g_.has_edge(a, b) && room(a) && room(b)) return Event::edge_ins(a, b);
    }
    return std::nullopt;
  }

  std::optional<Event> edge_del() {
    auto es = g_.edges();
    if (es.empty()) return std::nullopt;
    auto [a, b] = es[pick(0, static_cast<int>(es.size()) - 1)];
    return Event::edge_del(a, b);
  }

  std::optional<Event> node_ins() {
    std::vector<NodeId> absent;
    for (NodeId v : hot_)
      if (!g_.has_node(v)) absent.push_back(v);
    if (absent.empty()) return std::nullopt;
    NodeId z = absent[pick(0, static_cast<int>(absent.size()) - 1)];
    auto live = present_hot();
    std::vector<NodeId> nbrs;
    int want = pick(0, std::min<int>(c_.delta, static_cast<int>(live.size())));
    if (want > 0 && !live.empty()) {
      NodeId a = live[pick(0, static_cast<int>(live.size()) - 1)];
      if (room(a)) nbrs.push_back(a);
      if (coin(c_.close_bias))
        for (NodeId b : g_.neighbors(a))
          if (static_cast<int>(nbrs.size()) < want && room(b) && coin(0.7)) nbrs.push_back(b);
      for (int tries = 0; tries < 20 && static_cast<int>(nbrs.size()) < want; ++tries) {
        NodeId b = live[pick(0, static_cast<int>(live.size()) - 1)];
        if (room(b) && std::find(nbrs.begin(), nbrs.end(), b) == nbrs.end()) nbrs.push_back(b);
      }
    }
    return Event::node_ins(z, nbrs);
  }

  std::optional<Event> node_del() {
    auto live = present_hot();
    if (live.size() <= 3) return std::nullopt;
    return Event::node_del(live[pick(0, static_cast<int>(live.size()) - 1)]);
  }

  std::optional<Event> draw(ChangeType t) {
    switch (t) {
      case ChangeType::EdgeIns: return edge_ins();
      case ChangeType::EdgeDel: return edge_del();
      case ChangeType::NodeIns: return node_ins();
      case ChangeType::NodeDel: return node_del();
    }
    return std::nullopt;
  }

  Schedule build() {
    Schedule s;
    s.initial = g_;
    s.r = c_.r;
    s.delta = c_.delta;
    std::vector<ChangeType> types;
    std::vector<double> weights;
    for (auto [t, w] : c_.mix)
      if (w > 0) {
        types.push_back(t);
        weights.push_back(w);
        s.model.insert(t);
      }
    if (types.empty()) throw SimError("event mix has no positive weight");
    std::discrete_distribution<int> which(weights.begin(), weights.end());
    for (int k = 0; k < c_.events; ++k) {
      std::optional<Event> e;
      for (int tries = 0; tries < 30 && !e; ++tries) e = draw(types[which(rng_)]);
      if (!e) {
        s.pad(1);
        continue;
      }
      apply_event(g_, *e);
      s.change(*e);
      if (c_.max_gap > 0) s.pad(pick(0, c_.max_gap));
    }
    return s;
  }

 private:
  GenConfig c_;
  Graph g_;
  std::mt19937_64 rng_;
  std::vector<NodeId> hot_;
};

}  // namespace

Schedule random_schedule(const GenConfig& cfg, std::optional<Graph> initial) {
  Graph g;
  if (initial) {
    g = *initial;
  } else {
    int n0 = cfg.n0 < 0 ? cfg.n : cfg.n0;
    g = Graph::with_absent(cfg.n);
    for (NodeId v = 1; v <= n0; ++v) g.add_node(v);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    for (int k = 0, tries = 0; k < cfg.initial_edges && tries < 50 * cfg.initial_edges + 50; ++tries) {
      if (n0 < 2) break;
      NodeId a = std::uniform_int_distribution<int>(1, n0)(rng), b = std::uniform_int_distribution<int>(1, n0)(rng);
      if (a == b || g.has_edge(a, b) || g.degree(a) >= cfg.delta || g.degree(b) >= cfg.delta) continue;
      g.add_edge(a, b);
      ++k;
    }
  }
  return Gen(cfg, std::move(g)).build();
}

std::map<ChangeType, double> parse_mix(const std::string& s) {
  std::map<ChangeType, double> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    auto colon = tok.find(':');
    std::string name = tok.substr(0, colon);
    double w = colon == std::string::npos ? 1.0 : std::stod(tok.substr(colon + 1));
    out[change_from_name(name)] = w;
  }
  if (out.empty()) throw SimError("empty event mix");
  return out;
}

}  // namespace dynsub
