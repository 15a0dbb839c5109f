#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "dynsub/sim.hpp"

namespace dynsub {

struct GenConfig {
  int n = 16;       // ID range
  int n0 = -1;      // nodes 1..n0 present at the start; -1 means all
  int delta = 4;
  int r = 1;
  int events = 50;  // number of topological changes
  std::map<ChangeType, double> mix{{ChangeType::EdgeIns, 1.0}};
  double close_bias = 0.5;  // chance that an insertion closes an open wedge
  int max_gap = 0;          // extra quiet rounds drawn from [0, max_gap] after each change
  int hot = 0;              // endpoints drawn from this many random IDs (0 = all)
  int initial_edges = 0;    // random edges in G^0 when no initial graph is given
  std::uint64_t seed = 1;
};

// Random valid schedule. Events are rejection-sampled against the degree
// bound and the current graph; r-1 quiet rounds follow every change.
Schedule random_schedule(const GenConfig& cfg, std::optional<Graph> initial = std::nullopt);

// "edge_ins:2,node_ins:1" -> weights.
std::map<ChangeType, double> parse_mix(const std::string& s);

}  // namespace dynsub
