// Runs the built binary end to end. Every case works in its own directory
// under MEANOPT_TEST_TMP and starts the binary from there.

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(MEANOPT_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

struct Run {
  int code;
  std::string out;
};

Run run(const fs::path& dir, const std::string& args, const std::string& env = "") {
  const fs::path log = dir / "stdout.txt";
  const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" + MEANOPT_CLI_PATH + "' " +
                          args + " > '" + log.string() + "' 2> '" + (dir / "stderr.txt").string() +
                          "'";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(log)};
}

const char* kThreeAgents = R"({
  // three explicit agents, one below the SNR threshold
  "agents": [
    {"data_mbits": 10, "channel_gain": 8e-9, "distance_m": 50},
    {"data_mbits": 10, "channel_gain": 2e-9, "distance_m": 80},
    {"data_mbits": 10, "channel_gain": 1e-12, "distance_m": 1000}
  ]
})";

const char* kSweep = R"({
  "monte_carlo": {"n_trials": 300, "seed": 9},
  "sweep": {"axis": "D", "values": [2, 6, 10]}
})";

}  // namespace

TEST_CASE("solve on explicit agents") {
  const fs::path dir = fresh_dir("solve");
  write(dir / "cfg.json", kThreeAgents);
  const Run r = run(dir, "--config cfg.json --out out solve");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("K* = 2") != std::string::npos);
  const json doc = json::parse(slurp(dir / "out" / "solution.json"));
  CHECK(doc.at("solution").at("k_star") == 2);
  CHECK(doc.at("solution").at("modes") == json::array({1, 1, 0}));
  CHECK(doc.at("config").at("agents").size() == 3);

  // Nothing is written outside the output directory.
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    CHECK((name == "out" || name == "cfg.json" || name == "stdout.txt" || name == "stderr.txt"));
    ++entries;
  }
  CHECK(entries == 4);
}

TEST_CASE("solve with the oracle enabled") {
  const fs::path dir = fresh_dir("oracle");
  json cfg = json::parse(kThreeAgents, nullptr, true, true);
  cfg["oracle"] = {{"enabled", true}};
  write(dir / "cfg.json", cfg.dump());
  const Run r = run(dir, "--config cfg.json --out out solve");
  CHECK(r.code == 0);
  CHECK(r.out.find("oracle: agreed") != std::string::npos);
  const json doc = json::parse(slurp(dir / "out" / "solution.json"));
  CHECK(doc.at("oracle").at("agreed") == true);
  CHECK_FALSE(fs::exists(dir / "out" / "counterexample.json"));
}

TEST_CASE("all agents below the SNR threshold") {
  const fs::path dir = fresh_dir("gated");
  write(dir / "cfg.json", R"({"agents": [{"channel_gain": 1e-12}, {"channel_gain": 2e-12}]})");
  const Run r = run(dir, "--config cfg.json --out out solve");
  REQUIRE(r.code == 0);
  const json doc = json::parse(slurp(dir / "out" / "solution.json"));
  CHECK(doc.at("solution").at("k_star") == 0);
  CHECK(doc.at("solution").at("total_energy_j").get<double>() == doctest::Approx(0.4));
}

TEST_CASE("usage and config errors exit with 2") {
  const fs::path dir = fresh_dir("errors");
  write(dir / "typo.json", R"({"system": {"deadline": 0.7}})");
  write(dir / "nosweep.json", "{}");
  write(dir / "broken.json", "{ not json");
  CHECK(run(dir, "--config typo.json solve").code == 2);
  CHECK(run(dir, "--config missing.json solve").code == 2);
  CHECK(run(dir, "--config broken.json solve").code == 2);
  CHECK(run(dir, "--config nosweep.json sweep").code == 2);
  CHECK(run(dir, "--bogus solve").code == 2);
  CHECK(run(dir, "").code == 2);
  CHECK(run(dir, "--jobs 0 solve").code == 2);
  CHECK(run(dir, "--strategy proposed,magic solve").code == 2);
  CHECK(slurp(dir / "stderr.txt").find("magic") != std::string::npos);
}

TEST_CASE("sweep output is independent of the worker count") {
  const fs::path dir = fresh_dir("sweep");
  write(dir / "cfg.json", kSweep);
  REQUIRE(run(dir, "--config cfg.json --out one --jobs 1 -q sweep").code == 0);
  REQUIRE(run(dir, "--config cfg.json --out three --jobs 3 -q sweep --dump-trials").code == 0);
  const std::string a = slurp(dir / "one" / "sweep_D.csv");
  CHECK(a == slurp(dir / "three" / "sweep_D.csv"));
  CHECK(a.rfind("axis,value,strategy,mean_energy_j,stderr_j,n_trials\n", 0) == 0);
  CHECK(a.find("D,6e+06,Proposed,") != std::string::npos);
  CHECK(fs::exists(dir / "one" / "sweep_D.json"));

  std::ifstream trials(dir / "three" / "trials_D.jsonl");
  int lines = 0;
  for (std::string line; std::getline(trials, line);) {
    if (lines == 0) CHECK(json::parse(line).at("agents").size() == 15);
    ++lines;
  }
  CHECK(lines == 900);

  // A different seed gives different numbers.
  REQUIRE(run(dir, "--config cfg.json --out seeded --seed 10 -q sweep").code == 0);
  CHECK(a != slurp(dir / "seeded" / "sweep_D.csv"));
}

TEST_CASE("strategy filter from the environment") {
  const fs::path dir = fresh_dir("env");
  write(dir / "cfg.json", R"({"monte_carlo": {"n_trials": 20}})");
  const Run r = run(dir, "-q compare", "MEANOPT_CONFIG=cfg.json MEANOPT_OUT=envout MEANOPT_STRATEGY=proposed,local-only");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Local Only") != std::string::npos);
  CHECK(r.out.find("SNR-Based") == std::string::npos);
  const json doc = json::parse(slurp(dir / "envout" / "compare.json"));
  CHECK(doc.at("points").at(0).at("strategies").size() == 2);
}

TEST_CASE("infeasible trials beyond the allowed rate exit with 1") {
  const fs::path dir = fresh_dir("infeasible");
  // Local execution takes 1 s against a 0.7 s deadline and far agents cannot
  // collaborate, so enforcing the deadline leaves trials without a plan.
  write(dir / "cfg.json", R"({
    "monte_carlo": {"n_trials": 20},
    "policies": {"local_latency": "enforce"},
    "strategies": ["proposed"]
  })");
  CHECK(run(dir, "-q --config cfg.json compare").code == 1);
}

TEST_CASE("verify passes") {
  const fs::path dir = fresh_dir("verify");
  const Run r = run(dir, "--out out verify");
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  const json doc = json::parse(slurp(dir / "out" / "verify.json"));
  CHECK(doc.at("passed") == true);
}
