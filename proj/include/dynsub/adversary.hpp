#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dynsub/sim.hpp"

namespace dynsub {

using BigInt = boost::multiprecision::cpp_int;

// ---- reference protocols for attacks ----

// Never sends. Outputs the G^0 copies through itself whose incident edges are
// still present (listing), or whether any such copy exists (detection).
std::unique_ptr<Protocol> silence_protocol(const Graph& h, Problem p);
// Sends the single bit 1 to every neighbor every round. Says Yes once it has
// two neighbors (detection) and lists nothing.
std::unique_ptr<Protocol> constant_protocol(Problem p);
// Sends the low `width` bits of each current neighbor ID, sorted, to every
// neighbor. Says Yes when a neighbor's list mentions another neighbor. At
// width = id_width(n) this is a correct one-round triangle membership detector.
std::unique_ptr<Protocol> neighbor_id_protocol(int width);
// Clips every message to its first `cap` bits. This is the protocol "at
// bandwidth cap".
std::unique_ptr<Protocol> truncate(std::shared_ptr<const Protocol> inner, int cap);

// ---- scenario pairs ----

struct ScenarioPair {
  std::string label;
  Schedule a, b;
  NodeId witness = 0;
  int graded_round = 1;  // transcripts are compared over rounds 1..graded_round
  Problem problem = Problem::MemList;
  Output truth_a, truth_b;  // witness-level expected output, from the oracle
};

// What `w` must output in `s` after round `round` (at least round 1).
// MemList: copies through w; MemDetect: w in a copy; List: all copies;
// Detect: any copy.
Output expected_output(const Schedule& s, int round, const Graph& h, Problem p, NodeId w);

// The branch pair of the locality argument for `change`. Refused when T is
// not below r_H (r_H' for node deletions).
ScenarioPair locality_pair(const Graph& h, ChangeType change, int T, Problem p = Problem::MemList);

// One-round listing under deletions when ne_rad(h) >= 3 (edges) or
// rad(h) >= 3 (nodes): the node that lists the only copy in a quiet round
// cannot see a deletion three hops away. `protocol` picks the witness.
ScenarioPair far_deletion_pair(const Graph& h, const Protocol& protocol, ChangeType model);

struct IndistinguishVerdict {
  std::string result;  // "violation" or "distinguished"
  int compared_rounds = 0;
  bool transcripts_equal = false;
  bool truths_differ = false;
  bool outputs_equal = false;
  std::optional<int> first_difference;  // round
  std::vector<std::string> failing_branches;  // "a" / "b" that fail grading
  nlohmann::json to_json() const;
};

IndistinguishVerdict assert_indistinguishable(const ScenarioPair& pair, const Protocol& protocol, const Graph& h,
                                              std::optional<Problem> problem = std::nullopt);

// ---- clique hard instances ----

enum class Scenario { S1, S2, S3, S4 };
std::string scenario_name(Scenario s);

struct CliqueParams {
  NodeId a = 0, b = 0, c = 0, d = 0;
  int i = 1, istar = 2;
};

struct CliqueInstance {
  int s = 3, t = 1, n = 0;
  bool mixed = false;  // node insertions allowed: I starts absent
  std::vector<std::vector<NodeId>> K;  // K[j-1] is K^j
  std::vector<NodeId> I;
  int t_final = 0;
  CliqueParams p;
  Scenario scenario = Scenario::S1;
  Schedule schedule;
};

CliqueInstance clique_instance(int s, int t, int n, Scenario scenario, const CliqueParams& p, bool mixed);

struct AttackReport {
  std::string result;  // "violation" or "capacity"
  int classes = 0;
  int candidates = 0;
  nlohmann::json pair;     // params, witness and the confirming verdict
  nlohmann::json details;  // per-step counts
  nlohmann::json to_json() const;
};

struct AttackOptions {
  int workers = 0;   // 0 = hardware concurrency
  int max_b = 4;     // candidate b nodes tried before reporting capacity
};

// Edge insertions, membership detection of K_s.
AttackReport attack_memdetect_clique(const Protocol& protocol, int s, int cap, int t, int n,
                                     const AttackOptions& opt = {});
// Edge and node insertions, detection (or listing) of K_s.
AttackReport attack_detect_clique_mixed(const Protocol& protocol, int s, int cap, int t, int n,
                                        const AttackOptions& opt = {});

// ---- bandwidth lower-bound instances ----

struct LbInstance {
  Schedule schedule;
  NodeId witness = 0;
  int graded_round = 0;
  CopySet required;              // copies the witness must list at graded_round
  std::optional<bool> expected;  // detection instances
  BigInt choice_count = 0;
  long long receive_slots = 0;   // messages the witness can use, per the counting argument
  nlohmann::json roles;          // which IDs play u, v, w, U, W
};

// variant: edge_ins_nonclique, edge_ins_nonmultipartite, node_ins_nonclique,
// node_ins_nonmultipartite. `choice` holds 0-based indices into U (or pair
// indices i*n + j into U x W).
LbInstance memlist_lb_instance(const Graph& h, int n, const std::string& variant, const std::vector<int>& choice,
                               int r = 1);
// Deletes u_i's first edge (EdgeDel) or u_i itself (NodeDel); `deleted` is 0-based.
LbInstance memlist_del_lb_instance(const Graph& h, int n, int deleted, ChangeType model, int r = 1);
// `chosen` are 0-based indices into U (size n/2), `j` the final partner.
LbInstance memdetect_lb_instance(const Graph& h, int n, const std::vector<int>& chosen, int j, ChangeType model);

// Sum over rounds [from, to] of the degree of v.
long long receive_slots(const Schedule& s, NodeId v, int from, int to);

struct BlowupFamily {
  Graph h;
  ChangeType model = ChangeType::EdgeDel;
  int n = 0;
  Graph initial;
  std::vector<std::vector<NodeId>> blocks;  // blocks[x-1]: IDs standing in for node x of h
  CopySet designated;
};

BlowupFamily listing_lb_blowup(const Graph& h, int n, ChangeType model);

struct ProbeReport {
  NodeId listener = 0;
  int listed = 0;       // designated copies the listener holds
  int candidates = 0;   // elements it must tell apart after the deletion
  int required_bits = 0;
  Event deletion;
  bool pass = false;
  int max_bits = 0;
  nlohmann::json to_json() const;
};

ProbeReport probe(const BlowupFamily& fam, const Protocol& protocol);

// ---- counting ----

struct CapacityAudit {
  BigInt choice_count = 1;
  long long x = 0;
  int B = 0;
  int bits_needed = 0;  // ceil(log2 choice_count)
  bool satisfied = false;
  nlohmann::json to_json() const;
};

int ceil_log2_big(const BigInt& v);
BigInt binomial(int n, int k);
CapacityAudit capacity_audit(const BigInt& choice_count, long long x, int B);
// Smallest B with x*B >= ceil(log2 choice_count).
int min_bandwidth(const BigInt& choice_count, long long x);
// x = r*d + r*(d-1) + ... + r.
long long staggered_slots(int d, int r);

}  // namespace dynsub
