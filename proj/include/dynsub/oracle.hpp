#pragma once

#include <map>
#include <set>
#include <vector>

#include "dynsub/graph.hpp"

namespace dynsub {

// One subgraph of the host isomorphic to the target: its sorted edge list.
using Copy = std::vector<Edge>;
using CopySet = std::set<Copy>;

constexpr int kMaxTargetNodes = 8;

Copy canon(Copy c);
std::vector<NodeId> copy_nodes(const Copy& c);
bool copy_has_node(const Copy& c, NodeId v);
bool copy_has_edge(const Copy& c, const Edge& e);

CopySet enumerate_copies(const Graph& g, const Graph& h);
CopySet copies_containing(const Graph& g, const Graph& h, NodeId v);
bool contains_copy(const Graph& g, const Graph& h);
// Same answer as !copies_containing(g, h, v).empty(), stopping at the first hit.
bool in_some_copy(const Graph& g, const Graph& h, NodeId v);

// Copies of h whose edges all lie in `edges` (a partial view of some host).
CopySet copies_in_edges(int id_range, const std::vector<Edge>& edges, const Graph& h);

// node -> copies containing it, for grading many nodes against one truth.
std::map<NodeId, CopySet> index_by_node(const CopySet& all);

nlohmann::json copy_to_json(const Copy& c);
Copy copy_from_json(const nlohmann::json& j);

}  // namespace dynsub
