#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dynsub/cli.hpp"

using namespace dynsub;

namespace {

ExperimentConfig cfg_of(const std::string& cmd) {
  ExperimentConfig c;
  c.command = cmd;
  return c;
}

const nlohmann::json* row(const nlohmann::json& rows, const std::string& problem, const std::string& change) {
  for (const auto& r : rows)
    if (r["problem"] == problem && r["change"] == change) return &r;
  return nullptr;
}

ExperimentConfig triangle_run() {
  auto c = cfg_of("run");
  c.protocol = "memlist_k3_edge_ins";
  c.n = 256;
  c.events = 200;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("params regimes") {
  auto c = cfg_of("params");
  c.h = "C4";
  auto r = dispatch(c);
  CHECK(r.code == 0);
  CHECK(r.json["params"]["ne_rad"] == 2);
  CHECK(r.json["params"]["r_H"] == 1);
  CHECK((*row(r.json["regimes"], "List", "edge_del"))["cell"] == "Θ(log n)");

  c.h = "C5";
  auto r5 = dispatch(c);
  CHECK(r5.json["params"]["ne_rad"] == 3);
  CHECK((*row(r5.json["regimes"], "List", "edge_del"))["cell"] == "Impossible");

  c.h = "K3";
  auto r3 = dispatch(c);
  auto* md = row(r3.json["regimes"], "MemDetect", "edge_ins");
  REQUIRE(md);
  CHECK((*md)["cell"].get<std::string>().find("Ω(log log n)") != std::string::npos);
}

TEST_CASE("run passes, is deterministic and replays") {
  auto c = triangle_run();
  auto a = dispatch(c);
  CHECK(a.code == 0);
  CHECK(a.json["report"]["verdict"]["pass"] == true);
  int mb = a.json["report"]["max_bits"];
  CHECK(mb <= a.json["bound"].get<int>());
  CHECK(a.csv.rfind("round,event,graded,max_bits,failure\n", 0) == 0);
  CHECK(dump(dispatch(c).json) == dump(a.json));

  std::string path = "cli_replay_schedule.json";
  c.save_schedule = path;
  dispatch(c);
  auto r = triangle_run();
  r.schedule = path;
  auto b = dispatch(r);
  CHECK(b.json["report"] == a.json["report"]);
  std::remove(path.c_str());

  auto capped = triangle_run();
  capped.bcap = mb - 1;
  auto f = dispatch(capped);
  CHECK(f.code == 1);
  CHECK(f.json["report"]["verdict"]["kind"] == "cap_violation");
}

TEST_CASE("single-n sweep matches run") {
  auto s = cfg_of("sweep");
  s.protocol = "memlist_k3_edge_ins";
  s.n_list = {256};
  s.seed = 5;
  s.hot = 64;
  auto sw = dispatch(s);
  auto r = triangle_run();
  r.seed = 5;
  r.events = s.events;
  r.hot = 64;
  auto rr = dispatch(r);
  REQUIRE(sw.json["rows"].size() == 1);
  CHECK(sw.json["rows"][0]["max_bits"] == rr.json["report"]["max_bits"]);
  CHECK(sw.csv.rfind("n,runs,passes,max_bits,bound,loglog,ratio\n", 0) == 0);
}

TEST_CASE("attack commands") {
  auto c = cfg_of("attack");
  c.attack = "memdetect_clique";
  c.protocol = "constant";
  c.n = 512;
  c.bcap = 1;
  auto r = dispatch(c);
  CHECK(r.code == 1);
  CHECK(r.json["attack"]["result"] == "violation");

  auto l = cfg_of("attack");
  l.attack = "locality";
  l.h = "C5";
  l.change = "edge_ins";
  l.T = 1;
  CHECK(dispatch(l).code == 1);

  c.bcap.reset();
  CHECK_THROWS_AS(dispatch(c), ConfigError);
}

TEST_CASE("audit commands") {
  auto a = cfg_of("audit");
  a.lb = "edge_ins_nonclique";
  a.n = 16;
  a.r = 2;
  a.bcap = 3;
  auto r = dispatch(a);
  CHECK(r.json["instance_valid"] == true);
  CHECK(r.json["audit"]["x"] == 6);
  CHECK(r.json["audit"]["satisfied"] == true);
  CHECK(r.code == 0);
  a.bcap = 2;
  CHECK(dispatch(a).code == 1);
  a.lb = "nope";
  CHECK_THROWS_AS(dispatch(a), ConfigError);
}

TEST_CASE("configuration errors") {
  auto c = triangle_run();
  c.protocol = "no_such_protocol";
  CHECK_THROWS_AS(dispatch(c), ConfigError);
  c = triangle_run();
  c.mix = "edge_del";
  CHECK_THROWS_AS(dispatch(c), ConfigError);
  c = triangle_run();
  c.h = "Q9";
  CHECK_THROWS_AS(dispatch(c), ConfigError);
  CHECK_THROWS_AS(dispatch(cfg_of("frobnicate")), ConfigError);
  auto g = cfg_of("run");
  g.protocol = "memlist_general";
  g.h = "C5";
  g.r = 1;
  CHECK_THROWS_AS(dispatch(g), ConfigError);
}

TEST_CASE("general protocols run end to end") {
  for (auto [proto, h, mix] : std::vector<std::tuple<std::string, std::string, std::string>>{
           {"memlist_edge_del", "C4", ""},
           {"memdetect_multipartite_node_del", "K_{2,2,2}", ""},
           {"list_center_edge_del", "C4", ""},
           {"memlist_multipartite", "C4", "edge_ins,edge_del"}}) {
    auto c = cfg_of("run");
    c.protocol = proto;
    c.h = h;
    c.mix = mix;
    c.n = 24;
    c.events = 20;
    auto r = dispatch(c);
    CHECK_MESSAGE(r.code == 0, proto);
    CHECK(r.json["report"]["max_bits"].get<int>() <= r.json["bound"].get<int>());
  }
}

TEST_CASE("results are written next to each other") {
  auto r = dispatch(triangle_run());
  std::string out = "cli_result_test.json";
  write_result(r, out);
  std::ifstream j(out), c("cli_result_test.csv");
  std::stringstream js, cs;
  js << j.rdbuf();
  cs << c.rdbuf();
  CHECK(js.str() == dump(r.json));
  CHECK(cs.str() == r.csv);
  std::remove(out.c_str());
  std::remove("cli_result_test.csv");
}
