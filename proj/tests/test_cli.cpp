#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fluidnet/cli.hpp"
#include "fluidnet/model.hpp"
#include "test_networks.hpp"

using namespace fluidnet;

namespace {

std::string temp_file(const std::string& name) {
  return std::string("/tmp/fluidnet_test_") + name;
}

std::string write_network(const TreeNetworkSpec& spec, const std::string& name) {
  std::string path = temp_file(name);
  std::ofstream out(path);
  out << network_to_json(spec);
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate writes the condition report") {
  std::string net = write_network(testing::tandem2(), "net_ok.json");
  std::string out = temp_file("report.json");
  CHECK(run_cli({"validate", "--network", net, "--out", out}) == 0);
  std::string report = slurp(out);
  CHECK(report.find("\"accepted\": true") != std::string::npos);
  CHECK(report.find("\"T8\": true") != std::string::npos);
}

TEST_CASE("transform emits one csv row with the analytic value") {
  std::string net = write_network(testing::tandem2(), "net_t.json");
  std::string out = temp_file("transform.csv");
  CHECK(run_cli({"transform", "--network", net, "--op", "tandem-wb", "--omega",
                 "0.5,1", "--beta", "0,0", "--out", out}) == 0);
  std::string csv = slurp(out);
  CHECK(csv.find("op,station,alpha,beta,omega,gamma,value,form") !=
        std::string::npos);
  CHECK(csv.find("tandem-wb") != std::string::npos);
  CHECK(csv.find("0.248282417649") != std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical reports") {
  std::string net = write_network(testing::tandem2(), "net_mc.json");
  std::string out1 = temp_file("mc1.csv");
  std::string out2 = temp_file("mc2.csv");
  CHECK(run_cli({"mc-compare", "--network", net, "--paths", "400", "--seed",
                 "7", "--out", out1}) == 0);
  CHECK(run_cli({"mc-compare", "--network", net, "--paths", "400", "--seed",
                 "7", "--out", out2}) == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(slurp(out1).find("verdict") != std::string::npos);
}

TEST_CASE("simulate path dump is replayable") {
  std::string net = write_network(testing::tandem2(), "net_sim.json");
  std::string out1 = temp_file("sim1.csv");
  std::string out2 = temp_file("sim2.csv");
  CHECK(run_cli({"simulate", "--network", net, "--horizon", "20", "--seed",
                 "3", "--kind", "path", "--out", out1}) == 0);
  CHECK(run_cli({"simulate", "--network", net, "--horizon", "20", "--seed",
                 "3", "--kind", "path", "--out", out2}) == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(slurp(out1).find("t,component,jump_size,drift_segment_rate") !=
        std::string::npos);

  std::string traj = temp_file("traj.csv");
  CHECK(run_cli({"simulate", "--network", net, "--horizon", "20", "--seed",
                 "3", "--kind", "trajectory", "--out", traj}) == 0);
  CHECK(slurp(traj).find("t,W_1,W_2,L_1,L_2") != std::string::npos);
}

TEST_CASE("distinct exit codes per failure class") {
  CHECK(run_cli({"no-such-command"}) == 2);

  std::string bad = temp_file("bad.json");
  {
    std::ofstream out(bad);
    out << "{\"n\": 2}";
  }
  CHECK(run_cli({"validate", "--network", bad}) == 3);

  std::string net = write_network(testing::tandem2(), "net_dim.json");
  CHECK(run_cli({"transform", "--network", net, "--op", "tandem-wb", "--omega",
                 "0.5", "--beta", "0,0"}) == 4);
}

TEST_CASE("excursion check is deterministic and passes") {
  std::string out1 = temp_file("exc1.csv");
  std::string out2 = temp_file("exc2.csv");
  CHECK(run_cli({"excursion-check", "--seed", "11", "--draws", "20000", "--out",
                 out1}) == 0);
  CHECK(run_cli({"excursion-check", "--seed", "11", "--draws", "20000", "--out",
                 out2}) == 0);
  CHECK(slurp(out1) == slurp(out2));
}

}  // TEST_SUITE
