#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dynsub/bits.hpp"
#include "dynsub/graph.hpp"
#include "dynsub/oracle.hpp"

namespace dynsub {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ChangeType { EdgeIns, EdgeDel, NodeIns, NodeDel };
using ChangeModel = std::set<ChangeType>;

enum class EventKind { Quiet, EdgeIns, EdgeDel, NodeIns, NodeDel };

struct Event {
  EventKind kind = EventKind::Quiet;
  NodeId u = 0;  // edge endpoint
  NodeId v = 0;  // edge endpoint, or the inserted/deleted node
  std::vector<NodeId> nbrs;  // NodeIns only

  static Event quiet() { return {}; }
  static Event edge_ins(NodeId a, NodeId b) { return {EventKind::EdgeIns, std::min(a, b), std::max(a, b), {}}; }
  static Event edge_del(NodeId a, NodeId b) { return {EventKind::EdgeDel, std::min(a, b), std::max(a, b), {}}; }
  static Event node_ins(NodeId x, std::vector<NodeId> ns);
  static Event node_del(NodeId x) { return {EventKind::NodeDel, 0, x, {}}; }

  bool is_quiet() const { return kind == EventKind::Quiet; }
  bool operator==(const Event&) const = default;
};

std::string change_name(ChangeType c);
ChangeType change_from_name(const std::string& s);
std::optional<ChangeType> change_of(EventKind k);

struct Schedule {
  Graph initial;  // G^0; its id_range is the global n
  std::vector<Event> events;  // events[k] is applied at round k+1
  int r = 1;
  ChangeModel model;
  std::optional<int> delta;

  int n() const { return initial.id_range(); }
  Schedule& push(Event e) {
    events.push_back(std::move(e));
    return *this;
  }
  Schedule& pad(int k) {
    for (int i = 0; i < k; ++i) events.push_back(Event::quiet());
    return *this;
  }
  // Change followed by r-1 quiet rounds.
  Schedule& change(Event e) {
    push(std::move(e));
    return pad(r - 1);
  }
};

struct Violation {
  int index = -1;  // event index, -1 for schedule-level
  std::string message;
};

std::vector<Violation> validate(const Schedule& s);
void apply_event(Graph& g, const Event& e);
Graph graph_after(const Schedule& s, std::size_t k);  // G^k
nlohmann::json to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

enum class Problem { MemList, MemDetect, List, Detect };
std::string problem_name(Problem p);
Problem problem_from_name(const std::string& s);
inline bool is_listing(Problem p) { return p == Problem::MemList || p == Problem::List; }

using Output = std::variant<bool, CopySet>;
using Inbox = std::map<NodeId, BitString>;
using Outbox = std::map<NodeId, BitString>;

struct NodeView {
  NodeId self = 0;
  std::span<const NodeId> prev_neighbors;
  std::span<const NodeId> cur_neighbors;
  const Inbox* inbox = nullptr;  // null during the send phase

  bool gained(NodeId w) const;
  std::vector<NodeId> new_neighbors() const;
  std::vector<NodeId> lost_neighbors() const;
  bool has(NodeId w) const;
  const BitString* msg(NodeId w) const;
};

// Per-node state machine. Each round the engine first collects every node's
// outgoing messages, delivers them (including over edges inserted this
// round), then asks every node for its output.
class NodeState {
 public:
  virtual ~NodeState() = default;
  virtual Outbox send(const NodeView& view, int round) = 0;
  virtual Output receive(const NodeView& view, int round) = 0;
  virtual nlohmann::json debug() const { return nullptr; }
};

class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual std::string name() const = 0;
  virtual Problem problem() const = 0;
  virtual ChangeModel supports() const = 0;
  virtual std::unique_ptr<NodeState> init(NodeId self, int n, std::shared_ptr<const Graph> g0) const = 0;
  // For nodes inserted at `round`; they know G^0 and their neighbors, nothing else.
  virtual std::unique_ptr<NodeState> init_inserted(NodeId self, int n, const std::vector<NodeId>& nbrs,
                                                   std::shared_ptr<const Graph> g0, int round) const;
};

struct TranscriptEntry {
  int round = 0;
  std::vector<NodeId> neighbors;
  Inbox inbox;
  bool operator==(const TranscriptEntry&) const = default;
};
using Transcript = std::vector<TranscriptEntry>;

struct Verdict {
  bool pass = true;
  std::string kind;  // wrong_output, missed_copy, false_listing, no_yes, cap_violation
  int round = 0;
  NodeId node = 0;
  std::string reason;
};

struct RoundRecord {
  int round = 0;
  Event event;
  bool graded = false;
  int max_bits = 0;
  std::map<NodeId, Output> outputs;  // non-empty / Yes only
  std::map<std::pair<NodeId, NodeId>, int> bits;  // directed, non-zero only
};

struct RunReport {
  std::string protocol;
  Problem problem = Problem::MemList;
  int rounds_run = 0;
  int max_bits = 0;
  long long total_bits = 0;
  long long messages = 0;
  int failures = 0;
  Verdict verdict;
  std::vector<RoundRecord> rounds;
  std::map<NodeId, Transcript> transcripts;
};

struct Failure {
  NodeId node = 0;  // 0 for a global failure
  std::string kind;
  std::string reason;
};

// Grades outputs of the present nodes of `truth`.
std::vector<Failure> grade(Problem p, const Graph& h, const Graph& truth, const std::map<NodeId, Output>& outputs);

using Observer = std::function<void(int round, const Graph& g, const std::map<NodeId, std::unique_ptr<NodeState>>& states)>;

struct RunOptions {
  std::optional<int> bandwidth_cap;
  bool grade = true;
  bool enforce_model = true;
  bool keep_rounds = true;
  bool keep_outputs = true;
  bool record_all_transcripts = false;
  std::set<NodeId> watch;
  int tail_rounds = 0;  // extra quiet rounds after the schedule
  Observer observer;
  // Step only these nodes. The set must stay closed under adjacency for the
  // whole run; grading needs the full node set, so it is switched off.
  std::optional<std::set<NodeId>> only;
};

RunReport run(const Protocol& protocol, const Graph& h, const Schedule& schedule, const RunOptions& opts = {});

const Transcript& transcript(const RunReport& report, NodeId v);

nlohmann::json to_json(const Output& o);
nlohmann::json to_json(const RunReport& r);

}  // namespace dynsub
