#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynsub/sim.hpp"

namespace dynsub {

// Bad flags, unknown names, or a protocol that cannot run the requested
// schedule. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string command;  // params | run | attack | audit | sweep
  std::string h = "K3";
  std::string protocol;
  int n = 64;
  int delta = 4;
  int r = 1;
  std::optional<int> bcap;
  std::uint64_t seed = 1;
  int events = 150;
  std::string mix;       // empty: every change type the protocol supports
  std::string schedule;  // replay this file instead of generating
  std::string out;
  int workers = 0;

  // generator knobs
  int n0 = -1;
  int hot = 0;
  int initial_edges = 0;
  int max_gap = 0;
  double close_bias = 0.5;
  std::string initial;  // "", "empty", "blowup:<k>", or a graph spec
  int tail = 0;
  std::string save_schedule;

  // sweep
  std::vector<int> n_list;
  int repeats = 1;

  // attack
  std::string attack;  // memdetect_clique | detect_clique_mixed | locality | far_deletion
  int s = 3;
  int t = 0;  // 0: 3 for memdetect_clique, 2 for detect_clique_mixed
  int T = 0;
  std::string change;
  std::optional<int> width;  // neighbor_id ID bits
  int max_b = 4;

  // audit
  std::string lb;

  // Everything that can change an artifact; `out` and `workers` are left out.
  nlohmann::json to_json() const;
};

struct CmdResult {
  int code = 0;  // 0 pass, 1 fail
  nlohmann::json json;
  std::string csv;  // empty when the command has no table
};

std::vector<std::string> protocol_names();
std::unique_ptr<Protocol> make_protocol(const ExperimentConfig& cfg, const std::string& name, const Graph& h, int n);
// Closed-form per-message bound where one exists.
std::optional<int> protocol_bound(const std::string& name, const Graph& h, int n, int delta, int r);

// One row per problem x change type: the regime h falls in, the cost cell,
// and the shipped protocol covering it (if any).
nlohmann::json regime_rows(const Graph& h);

Graph parse_target(const std::string& spec);
Schedule build_schedule(const ExperimentConfig& cfg, const Graph& h, const ChangeModel& supported);

CmdResult cmd_params(const ExperimentConfig& cfg);
CmdResult cmd_run(const ExperimentConfig& cfg);
CmdResult cmd_sweep(const ExperimentConfig& cfg);
CmdResult cmd_attack(const ExperimentConfig& cfg);
CmdResult cmd_audit(const ExperimentConfig& cfg);
CmdResult dispatch(const ExperimentConfig& cfg);

std::string dump(const nlohmann::json& j);  // two-space indent, trailing newline
// JSON to `out` (stdout when empty), CSV next to it with a .csv suffix.
void write_result(const CmdResult& res, const std::string& out);

}  // namespace dynsub
