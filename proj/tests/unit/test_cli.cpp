// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"smoothfix"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = smoothfix::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("smoothfix_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("spectral writes alpha and the assumption report") {
  const auto dir = fresh_dir("spectral");
  const auto r = run_cli({"--seed", "1", "--out-dir", dir.string(), "spectral", "--model", "quicksort"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("alpha=1 ") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "spectral.json"));
  CHECK(j["alpha"].get<double>() == doctest::Approx(1.0));
  CHECK(j["assumptions"]["A4a"] == "true");
  CHECK(j["seed"].get<std::uint64_t>() == 1);
  CHECK(j.contains("config_hash"));
}

TEST_CASE("usage and precondition errors exit with 2") {
  const auto dir = fresh_dir("errors");
  CHECK(run_cli({"--seed", "1", "--out-dir", dir.string(), "spectral", "--model", "nope"}).code == 2);
  CHECK(run_cli({"spectral"}).code == 2);
  CHECK(run_cli({"--seed", "1", "--out-dir", dir.string(), "bogus"}).code == 2);
  CHECK(run_cli({"--seed", "1", "--out-dir", dir.string(), "spectral", "--model", "gaussian-steps-pair:m0=0"}).code ==
        2);
  CHECK(run_cli({"--seed", "1", "--out-dir", dir.string(), "solution", "--regime", "alpha_eq_2"}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("verify rejects a normal impostor with exit 1 and writes the report") {
  const auto dir = fresh_dir("verify");
  const auto r = run_cli({"--seed", "5", "--out-dir", dir.string(), "verify", "--impostor", "normal", "--n", "5000",
                          "--n-perm", "199", "--statistic", "energy"});
  CHECK(r.code == 1);
  const auto j = nlohmann::json::parse(slurp(dir / "verify.json"));
  CHECK(j["report"]["decision"] == "reject");
}

TEST_CASE("outputs are byte-identical for a fixed seed and stamped with config and seed") {
  const auto a = fresh_dir("repro_a"), b = fresh_dir("repro_b");
  const std::vector<std::string> tail{"solution", "--inhomogeneous", "--mu", "0.2", "--depth", "10", "--batch", "200"};
  auto args_a = std::vector<std::string>{"--seed", "9", "--out-dir", a.string()};
  auto args_b = std::vector<std::string>{"--seed", "9", "--out-dir", b.string()};
  args_a.insert(args_a.end(), tail.begin(), tail.end());
  args_b.insert(args_b.end(), tail.begin(), tail.end());
  REQUIRE(run_cli(args_a).code == 0);
  REQUIRE(run_cli(args_b).code == 0);
  const auto csv = slurp(a / "solution.csv");
  CHECK(csv == slurp(b / "solution.csv"));
  CHECK(slurp(a / "solution.json") == slurp(b / "solution.json"));
  CHECK(csv.rfind("# config_hash=", 0) == 0);
  CHECK(csv.find(",seed=9\r\n") != std::string::npos);

  // A different seed changes the values but not the hash of the other options.
  const auto c = fresh_dir("repro_c");
  auto args_c = std::vector<std::string>{"--seed", "10", "--out-dir", c.string()};
  args_c.insert(args_c.end(), tail.begin(), tail.end());
  REQUIRE(run_cli(args_c).code == 0);
  CHECK(slurp(c / "solution.csv") != csv);
}

TEST_CASE("sample, disintegrate and quicksort subcommands") {
  const auto dir = fresh_dir("misc");
  const auto base = std::vector<std::string>{"--seed", "3", "--out-dir", dir.string()};
  auto with = [&](std::vector<std::string> rest) {
    auto v = base;
    v.insert(v.end(), rest.begin(), rest.end());
    return run_cli(v);
  };
  CHECK(with({"sample", "--quantity", "W", "--model", "iid-uniform-pair", "--depth", "6", "--batch", "50",
              "--dump-tree"})
            .code == 0);
  CHECK(fs::exists(dir / "tree.jsonl"));
  CHECK(with({"sample", "--quantity", "martingale", "--depths", "2,4", "--batch", "50"}).code == 0);
  CHECK(with({"sample", "--quantity", "nonsense"}).code == 2);
  CHECK(with({"disintegrate", "--sigma", "1", "--depth-max", "4", "--trees", "5", "--t-grid", "0.5,1"}).code == 0);
  const auto trace = slurp(dir / "trace.csv");
  CHECK(trace.find("depth,t,re,im,ref_re,ref_im") != std::string::npos);
  CHECK(with({"quicksort", "--n", "500", "--reps", "500", "--wstar-batch", "500", "--n-perm", "99"}).code == 0);
  CHECK(fs::exists(dir / "quicksort.json"));
}

TEST_CASE("family options from a spec file match the same options on the command line") {
  const auto dir = fresh_dir("spec");
  {
    std::ofstream f(dir / "family.ini");
    f << "# solution family\nsigma = 0.5\ninhomogeneous = true\nmu = 0.1\ndepth = 8\nweight_floor = 0.001\n";
  }
  const auto spec = (dir / "family.ini").string();
  REQUIRE(run_cli({"--seed", "2", "--out-dir", (dir / "a").string(), "solution", "--spec", spec, "--batch", "40",
                   "--out", "x.csv"})
              .code == 0);
  REQUIRE(run_cli({"--seed", "2", "--out-dir", (dir / "b").string(), "solution", "--sigma", "0.5", "--inhomogeneous",
                   "--mu", "0.1", "--depth", "8", "--batch", "40", "--out", "x.csv"})
              .code == 0);
  CHECK(slurp(dir / "a" / "x.csv") == slurp(dir / "b" / "x.csv"));
  CHECK_FALSE(fs::exists(dir / "a" / "solution.csv"));

  // The command line wins over the file.
  REQUIRE(run_cli({"--seed", "2", "--out-dir", (dir / "c").string(), "solution", "--spec", spec, "--sigma", "2",
                   "--batch", "40"})
              .code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "c" / "solution.json"));
  CHECK(j["spec"]["sigma"].get<double>() == 2.0);
  CHECK(j["spec"]["mu"].get<double>() == doctest::Approx(0.1));

  {
    std::ofstream f(dir / "bad.ini");
    f << "sigmaa = 1\n";
  }
  CHECK(run_cli({"--seed", "2", "--out-dir", dir.string(), "solution", "--spec", (dir / "bad.ini").string()}).code == 2);
  CHECK(run_cli({"--seed", "2", "--out-dir", dir.string(), "solution", "--spec", (dir / "none.ini").string()}).code ==
        2);
}

TEST_CASE("experiment config file with one section per command") {
  const auto dir = fresh_dir("config");
  {
    std::ofstream f(dir / "run.ini");
    f << "seed = 4\n[spectral]\nmodel = powered-uniform-pair:p=2\n";
  }
  const auto r = run_cli({"--config", (dir / "run.ini").string(), "--out-dir", dir.string(), "spectral"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "spectral.json"));
  CHECK(j["alpha"].get<double>() == doctest::Approx(0.5));
  CHECK(j["seed"].get<std::uint64_t>() == 4);
}

TEST_CASE("verify reads a candidate written by solution") {
  const auto dir = fresh_dir("candidate");
  const auto base = std::vector<std::string>{"--seed", "6", "--out-dir", dir.string()};
  auto with = [&](std::vector<std::string> rest) {
    auto v = base;
    v.insert(v.end(), rest.begin(), rest.end());
    return run_cli(v);
  };
  REQUIRE(with({"solution", "--inhomogeneous", "--sigma", "0", "--batch", "2000"}).code == 0);
  const auto r = with({"verify", "--candidate", (dir / "solution.csv").string(), "--inhomogeneous", "--sigma", "0",
                       "--n", "1000", "--n-perm", "199"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "verify.json"));
  CHECK(j["report"]["n1"].get<std::size_t>() == 1000);
  CHECK(with({"verify", "--candidate", (dir / "solution.csv").string(), "--column", "nope"}).code == 2);
}
