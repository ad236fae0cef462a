// Copyright 2026 The POWR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(POWR_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string config(const std::string& name) {
  return std::string(POWR_CONFIG_DIR) + "/" + name;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("powr_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Cli, VerifyPasses) {
  const auto r = run("verify --seed 7");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("sherman_woodbury"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("train --config /nonexistent/x.json").status, 2);
  EXPECT_EQ(run("train --config " + config("gridworld.json") + " --override bogus=1").status, 2);
  EXPECT_EQ(run("train --config " + config("gridworld.json") + " --override lambda=0").status, 2);
  EXPECT_EQ(run("train").status, 2);
  EXPECT_EQ(run("nonsense").status, 2);
}

TEST(Cli, DumpConfigAppliesOverrides) {
  const auto r = run("dump-config --config " + config("gridworld.json") +
                     " --override eta=3.5 --override kernel.sigma=0.5");
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\"eta\": 3.5"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\"sigma\": 0.5"), std::string::npos);
}

TEST(Cli, TrainWithoutStepsStaysAtUniform) {
  const auto dir = scratch("flat");
  const auto r = run("train --quiet --config " + config("gridworld.json") +
                     " --override eta=0 --override 'rounds=[[2000,5],[2000,5]]'" +
                     " --override final_eval_episodes=100 --seed 0 --out " + dir.string());
  ASSERT_EQ(r.status, 0);
  std::istringstream csv(r.out);
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "timesteps,mean,min,max,seed");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (line.size() < 5 || line.substr(line.size() - 3) != "all") continue;
    ++rows;
    std::stringstream ss(line);
    std::string ts, mean;
    std::getline(ss, ts, ',');
    std::getline(ss, mean, ',');
    EXPECT_LT(std::stod(mean), 0.1);
  }
  EXPECT_EQ(rows, 2);
  EXPECT_TRUE(fs::exists(dir / "curve.csv"));
  EXPECT_TRUE(fs::exists(dir / "diagnostics.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "config.json"));
  EXPECT_TRUE(fs::exists(dir / "policy_seed0.bin"));
}

TEST(Cli, EvalReplaysSavedPolicy) {
  const auto dir = scratch("eval");
  const auto t = run("train --quiet --config " + config("gridworld.json") +
                     " --override 'rounds=[[0,50]]' --override dataset.source=exhaustive" +
                     " --override lambda=1e-10 --seed 0 --out " + dir.string());
  ASSERT_EQ(t.status, 0);
  const auto policy = (dir / "policy_seed0.bin").string();
  const auto e = run("eval --policy " + policy + " --config " + config("gridworld.json") +
                     " --episodes 2000 --seed 3");
  ASSERT_EQ(e.status, 0);
  double mean = 0.0;
  ASSERT_EQ(std::sscanf(e.out.c_str(), "episodes %*d mean %lf", &mean), 1) << e.out;
  EXPECT_GT(mean, 0.69);
  EXPECT_EQ(run("eval --policy " + (dir / "missing.bin").string()).status, 2);
}

}  // namespace
