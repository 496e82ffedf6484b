#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = STRATA_CONFIG_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"strata-lab"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = strata::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return (kConfigs / name).string(); }

fs::path scratch(const std::string& name, const std::string& text) {
  const auto dir = fs::temp_directory_path() / "strata_cli_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

constexpr const char* kNoSeed = R"(ambient_dimension = 1

[[component]]
kind = "segment"
weight = 1.0
start = [0.0]
end = [1.0]
)";

constexpr const char* kBadWeights = R"(ambient_dimension = 1

[[component]]
kind = "atoms"
weight = 0.6
points = [[2.0]]
pmf = [1.0]

[[component]]
kind = "segment"
weight = 0.6
start = [0.0]
end = [1.0]
)";

}  // namespace

TEST_CASE("the documented aep run succeeds") {
  auto r = run({"aep", "--config", config("m3.toml"), "--n", "100", "--delta", "0.1", "--xi", "0.1", "--trials",
                "10000", "--seed", "7"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("experiment,quantity,n,delta,xi,trials,level,seed,build_id,estimate,se,bound_low,bound_high,"
                    "pass,detail\n",
                    0) == 0);
  CHECK(r.out.find("aep,log_volume,100,") != std::string::npos);
}

TEST_CASE("missing seed exits with 2") {
  auto r = run({"entropy", "--config", scratch("noseed.toml", kNoSeed).string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("seed") != std::string::npos);
  CHECK(run({"entropy", "--config", scratch("noseed.toml", kNoSeed).string(), "--seed", "1"}).code == 0);
}

TEST_CASE("invalid measures are reported and rejected") {
  auto bad = scratch("bad_weights.toml", kBadWeights).string();
  auto r = run({"entropy", "--config", bad, "--seed", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("WeightSumMismatch") != std::string::npos);
  auto v = run({"validate", "--config", config("invalid_overlap.toml")});
  CHECK(v.code == 2);
  CHECK(v.out.find("OverlappingCarriers") != std::string::npos);
  CHECK(v.out.find("WeightSumMismatch") != std::string::npos);
  auto ok = run({"validate", "--config", config("strata_3d.toml")});
  CHECK(ok.code == 0);
  CHECK(ok.out.rfind("ok:", 0) == 0);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"aep"}).code == 2);
  CHECK(run({"aep", "--config", config("m3.toml"), "--format", "pdf"}).code == 2);
  CHECK(run({"aep", "--config", config("m3.toml"), "--xi", "0.7"}).code == 2);
  CHECK(run({"aep", "--config", (kConfigs / "absent.toml").string()}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("no typical draw exits with 3") {
  auto r = run({"aep", "--config", config("m3.toml"), "--n", "11", "--delta", "0", "--trials", "1000"});
  CHECK(r.code == 3);
  CHECK(r.err.find("DegenerateWeights") != std::string::npos);
}

TEST_CASE("repeated runs are byte identical and independent of threads") {
  const auto cfg = config("strata_3d.toml");
  for (const char* cmd : {"aep", "stratum", "diagnose", "entropy"}) {
    CAPTURE(cmd);
    auto a = run({cmd, "--config", cfg, "--n", "30", "--trials", "1000"});
    auto b = run({cmd, "--config", cfg, "--n", "30", "--trials", "1000"});
    auto c = run({cmd, "--config", cfg, "--n", "30", "--trials", "1000", "--threads", "4"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
  }
  auto d1 = run({"dims", "--config", cfg, "--threads", "1"});
  auto d4 = run({"dims", "--config", cfg, "--threads", "4"});
  CHECK(d1.code == 0);
  CHECK(d1.out == d4.out);
}

TEST_CASE("output formats") {
  const auto cfg = config("m3.toml");
  auto svg = run({"dims", "--config", cfg, "--format", "svg"});
  CHECK(svg.code == 0);
  CHECK(svg.out.find("<svg") != std::string::npos);
  CHECK(run({"entropy", "--config", cfg, "--format", "svg"}).code == 2);

  auto cells = run({"cells", "--config", cfg, "--levels", "1,2"});
  CHECK(cells.code == 0);
  CHECK(cells.out.rfind("level,j0,j1,p,mu_cell,component_id\n", 0) == 0);

  const auto path = fs::temp_directory_path() / "strata_cli_test" / "renyi.csv";
  fs::remove(path);
  auto to_file = run({"renyi", "--config", cfg, "--out", path.string()});
  CHECK(to_file.code == 0);
  CHECK(to_file.out.empty());
  CHECK(fs::file_size(path) > 0);
}
