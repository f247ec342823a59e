// Copyright 2026 The splitpub Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

int RunCli(const std::string& args) {
  const std::string cmd = std::string(SPLITPUB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("splitpub_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

TEST(CliTest, UnknownConfigKeyExitsTwo) {
  const std::string dir = Scratch("badkey");
  WriteText(dir + "/x.conf", "colour = red\n");
  EXPECT_EQ(RunCli("train --config " + dir + "/x.conf"), 2);
}

TEST(CliTest, BadFlagExitsTwo) {
  EXPECT_EQ(RunCli("train --no-such-flag"), 2);
  EXPECT_EQ(RunCli("train --mode PureVFL --wa 4 --wp 4"), 2);
}

TEST(CliTest, TrainWritesMetrics) {
  const std::string dir = Scratch("train");
  WriteText(dir + "/t.conf",
            "n = 400\nd = 8\nepochs = 2\nbatch_size = 64\nbottom_hidden = 4\n"
            "embed_dim = 4\ntop_hidden = 4\n");
  EXPECT_EQ(RunCli("train --config " + dir + "/t.conf --mode PubSubVFL --wa 2 --wp 2 "
                "--seed 5 --mu 2 --tddl-ms 5000 --p 5 --q 5 --delta-t0 5 "
                "--skew-passive-ms 0 --skew-active-ms 0 --out " + dir),
            0);
  EXPECT_TRUE(fs::exists(dir + "/metrics.jsonl"));
}

TEST(CliTest, ProfileThenPlanAndInfeasibleExitsFour) {
  const std::string dir = Scratch("plan");
  WriteText(dir + "/p.conf",
            "n = 400\nd = 8\nbottom_hidden = 4\nembed_dim = 4\ntop_hidden = 4\n"
            "calibration_batches = 8,32,128\ncalibration_repetitions = 2\n");
  ASSERT_EQ(RunCli("profile --config " + dir + "/p.conf --out " + dir), 0);
  EXPECT_EQ(RunCli("plan --profile " + dir + "/profile.txt --wa 2..50 --wp 2..50 "
                "--batches 16,32,64,128,256,512,1024 --out " + dir),
            0);
  EXPECT_TRUE(fs::exists(dir + "/plan.txt"));

  std::ifstream in(dir + "/profile.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto pos = text.find("mem_active_cap");
  ASSERT_NE(pos, std::string::npos);
  text = text.substr(0, pos) + "mem_active_cap = 1\n" +
         text.substr(text.find('\n', pos) + 1);
  WriteText(dir + "/tight.txt", text);
  EXPECT_EQ(RunCli("plan --profile " + dir + "/tight.txt --out " + dir), 4);
}

}  // namespace
