#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "semreg/config.hpp"
#include "test_util.hpp"

using semreg::test::TempDir;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, const std::string& out_file) {
  const std::string cmd =
      std::string(SEMREG_CLI_PATH) + " " + args + " >" + out_file + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

}  // namespace

TEST_CASE("synth export then self-registration is the identity") {
  TempDir tmp;
  const auto synth = run_cli("synth --out-dir " + tmp.path("scene") +
                                 " --seed 7",
                             tmp.path("synth.out"));
  REQUIRE(synth.exit_code == 0);
  CHECK(synth.out.find("src_points") != std::string::npos);

  const std::string reg_args =
      "register --src " + tmp.path("scene") + "/src.bin --dst " +
      tmp.path("scene") + "/src.bin --src-labels " + tmp.path("scene") +
      "/src.label --dst-labels " + tmp.path("scene") +
      "/src.label --clustering.min_cluster_size 15 "
      "--correspondence.feature_cap 200 --descriptors.downsample_res_m 0.8";
  const auto reg = run_cli(reg_args, tmp.path("reg.out"));
  REQUIRE(reg.exit_code == 0);
  CHECK(reg.out.find("mode g_trim") != std::string::npos);

  // The pose line must be the identity to high precision.
  std::istringstream record(reg.out);
  std::string line;
  bool checked = false;
  while (std::getline(record, line)) {
    if (line.rfind("pose ", 0) != 0) continue;
    std::istringstream ss(line.substr(5));
    double v[12];
    for (double& x : v) REQUIRE((ss >> x));
    const double expect[12] = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
    for (int i = 0; i < 12; ++i) CHECK(std::abs(v[i] - expect[i]) < 1e-6);
    checked = true;
  }
  CHECK(checked);

  SUBCASE("byte-identical records on identical inputs") {
    const auto again = run_cli(reg_args, tmp.path("reg2.out"));
    REQUIRE(again.exit_code == 0);
    CHECK(again.out == reg.out);
  }
  SUBCASE("l_trim toggle differs only in mode-dependent fields") {
    const auto ablation =
        run_cli(reg_args + " --mode l_trim", tmp.path("reg3.out"));
    REQUIRE(ablation.exit_code == 0);
    CHECK(ablation.out.find("mode l_trim") != std::string::npos);
    // Raw correspondence counts agree; the graph may differ.
    auto field = [](const std::string& record, const std::string& key) {
      const auto pos = record.find(key);
      REQUIRE(pos != std::string::npos);
      return record.substr(pos, record.find('\n', pos) - pos);
    };
    CHECK(field(ablation.out, "raw_correspondences") ==
          field(reg.out, "raw_correspondences"));
    CHECK(field(ablation.out, "semantic_correspondences") ==
          field(reg.out, "semantic_correspondences"));
  }
}

TEST_CASE("missing label file exits with the io code and names the path") {
  TempDir tmp;
  const auto synth = run_cli("synth --out-dir " + tmp.path("scene") +
                                 " --seed 9",
                             tmp.path("synth.out"));
  REQUIRE(synth.exit_code == 0);
  const std::string cmd = std::string(SEMREG_CLI_PATH) + " register --src " +
                          tmp.path("scene") + "/src.bin --dst " +
                          tmp.path("scene") + "/src.bin --src-labels " +
                          tmp.path("scene") + "/missing.label 2>" +
                          tmp.path("err.txt") + " >/dev/null";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 3);
  std::ifstream err(tmp.path("err.txt"));
  std::stringstream ss;
  ss << err.rdbuf();
  CHECK(ss.str().find("missing.label") != std::string::npos);
}

TEST_CASE("unknown config keys exit with the config code") {
  TempDir tmp;
  semreg::test::write_text(tmp.path("bad.yaml"), "clustering:\n  nope: 1\n");
  const std::string cmd = std::string(SEMREG_CLI_PATH) +
                          " yaw-sweep --config " + tmp.path("bad.yaml") +
                          " >/dev/null 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 7);
}

TEST_CASE("--help enumerates every config key with its default") {
  TempDir tmp;
  const auto help = run_cli("--help", tmp.path("help.out"));
  for (const auto& info : semreg::config_schema()) {
    CHECK(help.out.find("--" + info.key) != std::string::npos);
    if (!info.default_str.empty())
      CHECK(help.out.find(info.default_str) != std::string::npos);
  }
}
