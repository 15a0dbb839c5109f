// dynsub: run, grade, attack and audit subgraph protocols on dynamic graphs.
//
//   dynsub params --h C5
//   dynsub run --h K3 --protocol memlist_k3_edge_ins --n 256 --events 200 --seed 7 --out run.json
//   dynsub sweep --h K3 --protocol list_k3_mixed_ins --n-list 16,256,4096 --repeats 3
//   dynsub attack --attack memdetect_clique --protocol constant --n 512 --bcap 1
//   dynsub audit --lb edge_ins_nonclique --n 16 --bcap 2
//
// Exit codes: 0 pass, 1 fail (protocol failed, attack found a violation,
// audit unsatisfied), 2 configuration error.

#include <iostream>

#include <CLI11.hpp>

#include "dynsub/cli.hpp"

using namespace dynsub;

namespace {

void common(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--h", c.h, "target graph: Kn, Cn, Pn, K_{a,b,..}, paw, or 1-2,2-3,...");
  sub->add_option("--protocol", c.protocol, "protocol name");
  sub->add_option("--n", c.n, "ID range");
  sub->add_option("--delta", c.delta, "degree bound");
  sub->add_option("--r", c.r, "rounds allowed per change");
  sub->add_option("--bcap", c.bcap, "bandwidth cap in bits per edge per round");
  sub->add_option("--seed", c.seed, "generator seed");
  sub->add_option("--out", c.out, "JSON report path; CSV goes next to it");
  sub->add_option("--workers", c.workers, "worker threads (0 = all cores)");
}

void generator(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--events", c.events, "topological changes to generate");
  sub->add_option("--mix", c.mix, "change weights, e.g. edge_ins:2,node_ins:1");
  sub->add_option("--schedule", c.schedule, "replay a schedule JSON file");
  sub->add_option("--n0", c.n0, "nodes present at the start");
  sub->add_option("--hot", c.hot, "draw endpoints from this many IDs");
  sub->add_option("--initial-edges", c.initial_edges, "random edges in the initial graph");
  sub->add_option("--max-gap", c.max_gap, "extra quiet rounds after a change, drawn from [0, k]");
  sub->add_option("--close-bias", c.close_bias, "chance an insertion closes a wedge");
  sub->add_option("--initial", c.initial, "empty, blowup:<k>, or a graph spec");
  sub->add_option("--tail", c.tail, "quiet rounds appended after the schedule");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgraph protocols on dynamic graphs"};
  app.set_help_flag("--help", "show help");  // -h is taken by the target graph
  app.require_subcommand(1);
  ExperimentConfig c;

  auto* params = app.add_subcommand("params", "graph parameters and regime table");
  params->add_option("--h", c.h, "target graph")->required();
  params->add_option("--out", c.out, "JSON report path");

  auto* run = app.add_subcommand("run", "generate or load a schedule, run, grade");
  common(run, c);
  generator(run, c);
  run->add_option("--save-schedule", c.save_schedule, "write the schedule JSON here");

  auto* sweep = app.add_subcommand("sweep", "max bits across n");
  common(sweep, c);
  generator(sweep, c);
  sweep->add_option("--n-list", c.n_list, "n values")->delimiter(',');
  sweep->add_option("--repeats", c.repeats, "seeds per n");

  auto* attack = app.add_subcommand("attack", "search for an indistinguishable pair");
  common(attack, c);
  attack->add_option("--attack", c.attack, "memdetect_clique, detect_clique_mixed, locality, far_deletion")->required();
  attack->add_option("--s", c.s, "clique size");
  attack->add_option("--t", c.t, "gadget count");
  attack->add_option("--T", c.T, "rounds granted (locality)");
  attack->add_option("--change", c.change, "change type (locality, far_deletion)");
  attack->add_option("--width", c.width, "neighbor_id bits per ID");
  attack->add_option("--max-b", c.max_b, "b candidates tried");

  auto* audit = app.add_subcommand("audit", "counting bound of a lower-bound instance");
  common(audit, c);
  audit->add_option("--lb", c.lb, "instance family")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  c.command = app.get_subcommands().front()->get_name();
  try {
    CmdResult res = dispatch(c);
    write_result(res, c.out);
    return res.code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
