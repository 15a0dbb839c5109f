#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dynsub {

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;  // always first < second
using Parts = std::vector<std::vector<NodeId>>;

inline Edge make_edge(NodeId u, NodeId v) { return u < v ? Edge{u, v} : Edge{v, u}; }

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Undirected simple graph over IDs 1..id_range(). A node can be absent
// (not yet inserted, or deleted) while its ID stays reserved.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n);  // nodes 1..n, no edges

  static Graph with_absent(int id_range);  // capacity only, no nodes present
  static Graph from_edges(int n, const std::vector<Edge>& edges);

  int id_range() const { return static_cast<int>(present_.size()) - 1; }
  bool valid_id(NodeId v) const { return v >= 1 && v <= id_range(); }
  bool has_node(NodeId v) const { return valid_id(v) && present_[v]; }

  void add_node(NodeId v);
  void remove_node(NodeId v);  // drops incident edges
  void add_edge(NodeId u, NodeId v);
  void remove_edge(NodeId u, NodeId v);
  bool has_edge(NodeId u, NodeId v) const;

  const std::vector<NodeId>& neighbors(NodeId v) const;
  int degree(NodeId v) const { return static_cast<int>(neighbors(v).size()); }
  int max_degree() const;

  std::vector<NodeId> nodes() const;
  int node_count() const { return count_; }
  std::vector<Edge> edges() const;
  std::size_t edge_count() const { return edges_; }

  bool operator==(const Graph& o) const { return present_ == o.present_ && adj_ == o.adj_; }

 private:
  void check(NodeId v) const;
  void grow(int n);

  std::vector<char> present_{0};
  std::vector<std::vector<NodeId>> adj_{{}};
  int count_ = 0;
  std::size_t edges_ = 0;
};

// Named builders.
Graph complete_graph(int n);
Graph cycle_graph(int n);
Graph path_graph(int n);
Graph complete_multipartite(const std::vector<int>& sizes);
Graph paw_graph();  // triangle 1-2-3 plus pendant 4 on node 1
// Node x of h becomes sizes[x-1] independent copies, numbered consecutively;
// copies of adjacent nodes are fully joined.
Graph blow_up(const Graph& h, const std::vector<int>& sizes);

// Kn, Cn, Pn, K_{a,b,...}, paw, or an explicit list "1-2,2-3,...".
Graph parse_graph_spec(const std::string& spec);

// BFS distances from src; -1 marks unreachable or absent.
std::vector<int> bfs_distances(const Graph& g, NodeId src);

// nullopt is infinity.
std::optional<int> distance(const Graph& g, NodeId u, NodeId v);
std::optional<int> node_edge_distance(const Graph& g, NodeId u, const Edge& e);

bool is_connected(const Graph& g);

struct GraphParams {
  std::map<NodeId, int> ecc;
  int diam = 0;
  int rad = 0;
  std::vector<NodeId> center;
  std::map<NodeId, int> ne_ecc;
  int ne_diam = 0;
  int ne_rad = 0;
  std::vector<NodeId> ne_center;
  int r_H = 0;
  int r_H_prime = 0;
  bool is_clique = false;
  bool is_star = false;
  bool is_complete_multipartite = false;
  std::optional<Parts> parts;
};

GraphParams params(const Graph& g);

// Classes of the "equal or non-adjacent" relation, when it is an equivalence.
std::optional<Parts> multipartite_parts(const Graph& g);
bool is_complete_multipartite(const Graph& g);
bool is_clique(const Graph& g);
bool is_star(const Graph& g);

// Nodes within distance r of u, and the edges with an endpoint among them.
std::vector<NodeId> ball_nodes(const Graph& g, NodeId u, int r);
std::vector<Edge> ball_edges(const Graph& g, NodeId u, int r);

nlohmann::json to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const GraphParams& p);

}  // namespace dynsub
