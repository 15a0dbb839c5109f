#pragma once

#include <memory>

#include "dynsub/sim.hpp"

namespace dynsub {

// Window and period lengths for the two triangle protocols.
struct K3Params {
  int n = 0;
  int delta = 0;
  int d = 0;
  int T = 0;
  int L = 0;  // ID bits
};

K3Params memlist_k3_params(int n, int delta);  // d = ceil(log2 n), T = floor(d/2)
K3Params list_k3_params(int n, int delta);     // d = ceil(log2 log2 n), T = floor(d/2)

// Closed-form per-edge per-round bit bounds for the encodings below.
int memlist_k3_bound(int n, int delta);
int list_k3_bound(int n, int delta);

// Triangle membership detection under edge insertions: recent-record bitmaps
// on a new edge, plus a one-shot neighbor list in d blocks.
std::unique_ptr<Protocol> baseline_memdetect_k3(int n, int delta, int d);

// Triangle membership listing under edge insertions.
std::unique_ptr<Protocol> memlist_k3_edge_ins(int n, int delta);

// Triangle listing under edge and node insertions.
std::unique_ptr<Protocol> list_k3_mixed_ins(int n, int delta);

Copy triangle(NodeId a, NodeId b, NodeId c);

}  // namespace dynsub
