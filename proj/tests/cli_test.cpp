// Copyright 2026 The Unitarity Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end runs of the command-line tool. UNITARITY_CLI is the binary path.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct Outcome {
  int status = -1;
  std::string out;  // stdout and stderr
};

Outcome run(const std::string &args) {
  const std::string cmd = std::string(UNITARITY_CLI) + " " + args + " 2>&1";
  Outcome r;
  FILE *p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("unitarity_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string &name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, ChannelInfoNamedChannels) {
  Outcome r = run("channel-info dep:0.1");
  ASSERT_EQ(r.status, 0) << r.out;
  Json j = Json::parse(r.out);
  EXPECT_NEAR(j.at("unitarity").get<double>(), 0.81, 1e-12);

  r = run("channel-info reset:0.003");
  ASSERT_EQ(r.status, 0) << r.out;
  j = Json::parse(r.out);
  // Bloch map r -> (1 - p) r + p z.
  const double p = 0.003;
  EXPECT_NEAR(j.at("unitarity").get<double>(), (1 - p) * (1 - p), 1e-12);

  r = run("channel-info haar:42");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NEAR(Json::parse(r.out).at("unitarity").get<double>(), 1.0, 1e-12);
}

TEST_F(Cli, ChannelInfoRejectsBadSpec) {
  const Outcome r = run("channel-info bogus:1");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("bogus"), std::string::npos);
}

TEST_F(Cli, SimulateIsReproducible) {
  const std::string common = " --seed 7 --lengths 1:30:5 --sequences 4 --shots 50 --out ";
  ASSERT_EQ(run("simulate" + common + path("a")).status, 0);
  ASSERT_EQ(run("simulate" + common + path("b")).status, 0);
  const Json ma = Json::parse(slurp(path("a/manifest.json")));
  const Json mb = Json::parse(slurp(path("b/manifest.json")));
  EXPECT_EQ(ma.at("outputs"), mb.at("outputs"));
  EXPECT_EQ(slurp(path("a/aggregate.csv")), slurp(path("b/aggregate.csv")));

  // Digests agree with an external sha256 implementation when one is available.
  if (std::system("command -v sha256sum >/dev/null 2>&1") == 0) {
    for (const auto &o : ma.at("outputs")) {
      FILE *p = popen(("sha256sum " + path("a/" + o.at("path").get<std::string>())).c_str(), "r");
      char hex[65] = {0};
      ASSERT_EQ(fread(hex, 1, 64, p), 64u);
      pclose(p);
      EXPECT_EQ(std::string(hex), o.at("sha256").get<std::string>());
    }
  }
}

TEST_F(Cli, FitRecoversSyntheticDecay) {
  std::ofstream csv(path("agg.csv"));
  csv << "m,mean_sq,stderr,K,N\n";
  for (int m = 1; m <= 40; m += 3) {
    csv << m << "," << std::setprecision(17) << 0.2 + 0.7 * std::pow(0.95, m - 1) << ",0.001,30,150\n";
  }
  csv.close();
  const Outcome r = run("fit " + path("agg.csv"));
  ASSERT_EQ(r.status, 0) << r.out;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("model"), "tp");
  EXPECT_NEAR(j.at("params").at("u").get<double>(), 0.95, 1e-8);
}

TEST_F(Cli, FitReportsLineOfSchemaError) {
  std::ofstream csv(path("bad.csv"));
  csv << "m,mean_sq,stderr,K,N\n1,0.5,0.1,3,10\n2,x,0.1,3,10\n";
  csv.close();
  const Outcome r = run("fit " + path("bad.csv"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("line 3"), std::string::npos) << r.out;
}

TEST_F(Cli, ScanRankOneIsUnitary) {
  const Outcome r = run("scan-ensemble --ranks 1 --samples 20 --seed 3");
  ASSERT_EQ(r.status, 0) << r.out;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "rank,sample,unitarity,infidelity");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string rank, sample, u;
    std::getline(fields, rank, ',');
    std::getline(fields, sample, ',');
    std::getline(fields, u, ',');
    EXPECT_EQ(rank, "1");
    EXPECT_GT(std::stod(u), 1.0 - 1e-8);
    ++rows;
  }
  EXPECT_EQ(rows, 20);
}

TEST_F(Cli, VerifyExitCodes) {
  EXPECT_EQ(run("verify --level quick").status, 0);
  EXPECT_EQ(run("verify --level quick --tolerance-scale 0").status, 3);
}

TEST_F(Cli, UnknownOptionIsUsageError) {
  EXPECT_NE(run("simulate --no-such-flag").status, 0);
}

}  // namespace
