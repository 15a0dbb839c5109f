#pragma once

#include <memory>

#include "dynsub/sim.hpp"

namespace dynsub {

// Membership listing from the radius-1 view: every node streams its n-bit
// neighbor bitmap in r blocks, one block per round (block = round mod r).
// Needs a complete multipartite target.
std::unique_ptr<Protocol> memlist_multipartite(const Graph& h, int n, int r);

// Membership listing from the radius-t view, t = r_H. Each node streams its
// hop-labelled edge knowledge in floor(r/t) blocks; see payload_bits below.
std::unique_ptr<Protocol> memlist_general(const Graph& h, int n, int r);

// Bits of one streamed view payload: (n-1) incident bits plus ceil(log2 t)
// bits for each pair not touching the sender. The multipartite variant
// sends a plain n-bit bitmap.
int view_payload_bits(int n, int t, bool bitmap_only);

// Deletions flooded as IDs for r_H (edge) or r_H' (node) hops, each hop
// stretched over floor(r/hops) rounds. Nodes prune the copies they know
// from G^0.
std::unique_ptr<Protocol> memlist_edge_del(const Graph& h, int n, int r);
std::unique_ptr<Protocol> memlist_node_del(const Graph& h, int n, int r);

// Header bits in front of each flood block: [hop][block index].
int flood_header_bits(int hops, int r);

std::unique_ptr<Protocol> memdetect_star(const Graph& h);
std::unique_ptr<Protocol> memdetect_rad1_node_del(const Graph& h);
std::unique_ptr<Protocol> memdetect_multipartite_node_del(const Graph& h);

// Listing under deletions. `model` is EdgeDel or NodeDel.
std::unique_ptr<Protocol> list_star_del(const Graph& h, ChangeType model);
std::unique_ptr<Protocol> list_rad1_edge_del(const Graph& h);
std::unique_ptr<Protocol> list_center_del(const Graph& h, int n, ChangeType model);

// Min-ID node among the centers (node_edge = false) or node-edge centers
// of the copy, measured inside the copy itself.
NodeId copy_lister(const Copy& c, bool node_edge);

// Count of nodes outside S and v adjacent to all of S.
int common_count(const Graph& g, NodeId v, const std::vector<NodeId>& S);

}  // namespace dynsub
