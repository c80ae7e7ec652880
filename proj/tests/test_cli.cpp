// Drives the installed command-line binary end to end: output schemas,
// exit codes, config handling, and byte-identical reruns.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef CAPTRAP_CLI_PATH
#error "CAPTRAP_CLI_PATH must point at the built binary"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string temp_dir() {
  static int counter = 0;
  std::string dir = "cli_test_tmp_" + std::to_string(counter++);
  if (std::system(("mkdir -p " + dir).c_str()) != 0) std::abort();
  return dir;
}

RunResult run(const std::string& args, bool raw = false) {
  const std::string dir = temp_dir();
  const std::string out_path = dir + "/out.txt";
  const std::string cmd = (raw ? args : std::string(CAPTRAP_CLI_PATH) + " " + args) +
                          " > " + out_path + " 2>/dev/null";
  RunResult r;
  const int status = std::system(cmd.c_str());
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

const std::string kRef =
    "--r 1.44 --lambda 1 --alpha 0.8 --xstar 1 --barrier 2 --ct 0.25";

}  // namespace

TEST_CASE("trap: single point emits one JSON record") {
  const auto r = run("trap " + kRef + " --x 1.5");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"x\":1.5") != std::string::npos);
  CHECK(r.out.find("0.91795653820") != std::string::npos);
}

TEST_CASE("trap: grid sweep emits the exact CSV schema") {
  const auto r = run("trap " + kRef + " --x-grid 1:6:0.5 --format csv");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("x,value\n", 0) == 0);
  // 11 grid rows + header
  int lines = 0;
  for (char ch : r.out)
    if (ch == '\n') ++lines;
  CHECK(lines == 12);
}

TEST_CASE("trap: certain regime carries the note") {
  const auto r = run(
      "trap --r 1.44 --lambda 1 --alpha 0.6 --xstar 1 --barrier 2 --ct 0.25 "
      "--x 2");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"value\":1.0") != std::string::npos);
  CHECK(r.out.find("trapping-certain") != std::string::npos);
}

TEST_CASE("ep: bound-check column stays within the trapping curve") {
  const auto r = run("ep " + kRef +
                     " --omega-const 10000 --x-grid 1:4:0.5 --bound-check "
                     "--format csv");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("x,value,trap,bound_ok", 0) == 0);
  CHECK(r.out.find(",0\n") == std::string::npos);  // no bound violations
}

TEST_CASE("validation and numerical exit codes") {
  CHECK(run("trap " + kRef + " --delta 0.1").exit_code == 2);  // missing x
  CHECK(run("trap --r 1.44 --lambda 1 --alpha 0.8 --xstar 1 --barrier 2 "
            "--ct 1.44 --x 1.5")
            .exit_code == 2);  // r = c_t
  CHECK(run("ep " + kRef + " --x 1.5").exit_code == 2);  // no omega
  CHECK(run("simulate " + kRef + " --trapping --x 1.5 --n 500").exit_code ==
        2);  // seed required
  CHECK(run("frontier --kind trapping --target 0.9 --r 1.44 --lambda 1 "
            "--alpha 1.25 --xstar 1 --x 2 --b-grid 6:6:1 --format csv")
            .out.find("NA") != std::string::npos);  // unattainable marker
  // numerical error path: unattainable single-point solve is caught by
  // frontier, so force one through an ep evaluation on the branch cut
  CHECK(run("ep --r 1.44 --lambda 1 --alpha 0.6 --xstar 1 --barrier 2 "
            "--ct 0.25 --omega-const 0.02 --x 1.5")
            .exit_code == 2);  // net profit violated -> validation
}

TEST_CASE("simulate: reruns are byte-identical and worker-invariant") {
  const std::string cmd = "simulate " + kRef +
                          " --trapping --x 1.5 --n 4000 --seed 7 "
                          "--no-horizon-check";
  const auto r1 = run(cmd + " --workers 1");
  const auto r2 = run(cmd + " --workers 1");
  const auto r4 = run(cmd + " --workers 4");
  CHECK(r1.exit_code == 0);
  CHECK(r1.out == r2.out);
  CHECK(r1.out == r4.out);
  CHECK(r1.out.find("\"ci_low\"") != std::string::npos);
  CHECK(r1.out.find("\"ci_high\"") != std::string::npos);
}

TEST_CASE("simulate: grid CSV schema and horizon diagnostic") {
  const auto r = run("simulate " + kRef +
                     " --omega-const 0.02 --x-grid 1:2:0.5 --n 1000 --seed 3 "
                     "--horizon 50 --format csv");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("x,value,ci_low,ci_high\n", 0) == 0);
  const auto rj = run("simulate " + kRef +
                      " --trapping --x 1.5 --n 1000 --seed 3 --horizon 100");
  CHECK(rj.out.find("value_2x_horizon") != std::string::npos);
  CHECK(rj.out.find("horizon_ok") != std::string::npos);
}

TEST_CASE("simulate: trace file holds per-path events") {
  const std::string dir = temp_dir();
  const auto r = run("simulate " + kRef +
                     " --trapping --x 1.5 --n 200 --seed 5 --horizon 20 "
                     "--no-horizon-check --trace " +
                     dir + "/trace.csv");
  CHECK(r.exit_code == 0);
  std::ifstream tf(dir + "/trace.csv");
  std::string head;
  std::getline(tf, head);
  CHECK(head == "path,time,capital");
  int rows = 0;
  std::string line;
  while (std::getline(tf, line)) ++rows;
  CHECK(rows > 10);
}

TEST_CASE("config file is an exclusive parameter source") {
  const std::string dir = temp_dir();
  {
    std::ofstream cfg(dir + "/params.json");
    cfg << R"({"a":0.1,"b":4,"c_s":0.4,"lambda":1,"alpha":0.8,)"
        << R"("x_star":1,"barrier":2,"c_t":0.25,"x":1.5,"seed":7})";
  }
  const auto r = run("trap --config " + dir + "/params.json");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("0.91795653820") != std::string::npos);
  // mixing sources is rejected
  CHECK(run("trap --config " + dir + "/params.json --r 1.44 --x 1.5")
            .exit_code == 2);
  // command options may come from the file too
  const auto rs = run("simulate --config " + dir +
                      "/params.json --trapping --n 500 --no-horizon-check "
                      "--horizon 50");
  CHECK(rs.exit_code == 0);
  CHECK(rs.out.find("\"seed\":7") != std::string::npos);
}

TEST_CASE("loss tables feed the simulator and are rejected elsewhere") {
  const std::string dir = temp_dir();
  {
    std::ofstream t(dir + "/loss.csv");
    t << "u,z\n0,0.2\n0.5,0.6\n1,1\n";
  }
  const auto r = run("simulate " + kRef + " --trapping --x 1.5 --n 500 "
                     "--seed 11 --horizon 50 --no-horizon-check --loss-table " +
                     dir + "/loss.csv");
  CHECK(r.exit_code == 0);
  // closed-form commands have no such flag: CLI rejects it at parse time
  CHECK(run("trap " + kRef + " --x 1.5 --loss-table " + dir + "/loss.csv")
            .exit_code == 2);
}

TEST_CASE("frontier: round-trip column within tolerance") {
  const auto r = run(
      "frontier --kind trapping --target 0.3 --r 1.44 --lambda 1 "
      "--alpha 1.25 --xstar 1 --x 2 --b-grid 6:10:2 --format csv");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("barrier,ct,abs_err", 0) == 0);
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  double prev_ct = 1e18;
  while (std::getline(rows, line)) {
    double b = 0, ct = 0, err = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &b, &ct, &err) == 3);
    CHECK(err <= 1e-7);
    CHECK(ct <= prev_ct);
    prev_ct = ct;
  }
}

TEST_CASE("ep: exponential hazard has no transform mode") {
  CHECK(run("ep " + kRef + " --omega-exp 0.02 --delta 0.1 --x 1.5").exit_code ==
        2);
}

TEST_CASE("worker count can come from the environment") {
  const std::string cmd = "simulate " + kRef +
                          " --trapping --x 1.5 --n 2000 --seed 7 "
                          "--no-horizon-check";
  const auto direct = run(cmd + " --workers 2");
  const auto via_env = run("CAPTRAP_WORKERS=2 " + std::string(CAPTRAP_CLI_PATH) +
                               " " + cmd,
                           /*raw=*/true);
  CHECK(direct.exit_code == 0);
  CHECK(via_env.exit_code == 0);
  CHECK(direct.out == via_env.out);
}

TEST_CASE("parameter sensitivity sweeps") {
  const auto r = run("trap " + kRef + " --x 1.3 --sweep c_t=0.1:1:0.3");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("c_t,value", 0) == 0);
  // non-increasing in the transfer rate
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  double prev = 2.0;
  while (std::getline(rows, line)) {
    double key = 0, value = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &key, &value) == 2);
    CHECK(value <= prev + 1e-12);
    prev = value;
  }
  const auto ro = run("ep " + kRef +
                      " --omega-const 0.02 --x 1.3 --sweep omega=0.02:0.08:0.03");
  CHECK(ro.exit_code == 0);
  CHECK(ro.out.rfind("omega,value", 0) == 0);
  // micro-input sweeps need the micro parameterization
  CHECK(run("trap " + kRef + " --x 1.3 --sweep b=3:5:1").exit_code == 2);
  CHECK(run("trap --a 0.1 --b 4 --cs 0.4 --lambda 1 --alpha 0.8 --xstar 1 "
            "--barrier 2 --ct 0.25 --x 1.3 --sweep b=3:5:1")
            .exit_code == 0);
  CHECK(run("trap " + kRef + " --x 1.3 --sweep bogus=1:2:1").exit_code == 2);
}

TEST_CASE("check: passes at the reference setup, also with tight tolerances") {
  CHECK(run("check " + kRef + " --n 5000").exit_code == 0);
  CHECK(run("check " + kRef + " --n 5000 --tight").exit_code == 0);
}
