// Copyright 2026 The MCB Lab Authors.
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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mcb/cli.hpp"

namespace mcb::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("mcb_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

int run(const std::string& cmd, const Json& cfg, const fs::path& out, int threads = 1) {
  RunOptions o;
  o.config = cfg;
  o.config_text = cfg.dump();
  o.out_dir = out;
  o.threads = threads;
  std::ostringstream log;
  const int code = execute(cmd, o, log);
  if (code == kConfigError || code == kNumericalFailure) std::cerr << log.str();
  return code;
}

Json line_model(const std::string& rule, int size) {
  return {{"size", size}, {"points", {0, 1, 2, 3}}, {"rule", {{"name", rule}}}};
}

TEST(Format, RoundTripsDoubles) {
  for (double v : {0.1, 1.0 / 3.0, 2.0e-300, -7.25, 123456789.123456789}) EXPECT_EQ(std::stod(fmt(v)), v);
  EXPECT_EQ(fmt(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(fmt(std::optional<double>{}), "");
}

TEST(Format, Sha256) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Parse, ModelErrorsNameTheField) {
  try {
    parse_model(Json{{"size", 2}, {"points", {0, 1}}, {"kernels", {{{0.5, 0.6}, {0.5, 0.5}}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model"), std::string::npos);
  }
  EXPECT_THROW(parse_model(Json{{"size", 2}, {"kernels", {{{1, 0}, {0, 1}}}}}), ConfigError);
  EXPECT_THROW(parse_model(Json{{"size", 3}, {"points", {0, 1}}, {"rule", {{"name", "identity"}}}}), ConfigError);
  EXPECT_THROW(parse_model(Json{{"size", 3}, {"points", {0, 1, 2}}, {"rule", {{"name", "bogus"}}}}), ConfigError);
  EXPECT_THROW(parse_model(Json::array()), ConfigError);
}

TEST(Parse, ModelForms) {
  const FiniteMarkovModel a = parse_model(Json{{"size", 2},
                                               {"dist", {{0, 2}, {2, 0}}},
                                               {"mu0", {1, 0}},
                                               {"kernels", {{{0.5, 0.5}, {0.25, 0.75}}}},
                                               {"periodic", true}});
  EXPECT_EQ(a.size(), 2);
  EXPECT_EQ(a.space()(0, 1), 2.0);
  EXPECT_EQ((*a.kernel(7))(1, 1), 0.75);
  const FiniteMarkovModel b = parse_model(Json{{"rule", {{"name", "dyadic_grid"}, {"params", {{"J", 3}, {"D", 8}}}}}});
  EXPECT_EQ(b.size(), 9);
  EXPECT_NEAR(b.mu0().sum(), 1.0, 1e-15);
}

TEST(Parse, Observables) {
  const ObservableSequence c = parse_observables(Json{{"kind", "constant"}, {"value", {{1, 0}, {0, 2}}}}, 3);
  EXPECT_EQ(c.dim(), 2);
  const ObservableSequence e = parse_observables(
      Json{{"kind", "explicit"}, {"frames", {{{{1}}, {{-1}}}}}}, 2);
  EXPECT_EQ(e.at(5, 1)(0, 0).real(), -1.0);
  const ObservableSequence z =
      parse_observables(Json{{"kind", "explicit"}, {"frames", {{{{0, {0, 1}}, {{0, -1}, 0}}}}}}, 1);
  EXPECT_EQ(z.at(1, 0)(0, 1), Complex(0, 1));
  EXPECT_THROW(parse_observables(Json{{"kind", "explicit"}, {"frames", {{{{1}}}}}}, 2), ConfigError);
  EXPECT_THROW(parse_observables(Json{{"kind", "nope"}}, 2), ConfigError);
  EXPECT_THROW(parse_observables(Json{{"kind", "random"}, {"m", 2}, {"horizon", 3}}, 2), ConfigError);
}

TEST(Curvature, IdentityAndMixing) {
  const fs::path out = scratch("curv");
  ASSERT_EQ(run("curvature", {{"n", 5}, {"model", line_model("identity", 4)}}, out / "id"), kOk);
  auto rows = read_csv(out / "id" / "curvature.csv");
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0][0], "t");
  EXPECT_EQ(rows[0][1], "kappa_t");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_EQ(std::stod(rows[r][1]), 0.0);
    EXPECT_NEAR(std::stod(rows[r][2]), 1.0, 1e-12);
  }
  ASSERT_EQ(run("curvature", {{"n", 5}, {"model", line_model("mixing", 4)}}, out / "mix"), kOk);
  rows = read_csv(out / "mix" / "curvature.csv");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_NEAR(std::stod(rows[r][1]), 1.0, 1e-12);
    EXPECT_NEAR(std::stod(rows[r][2]), 0.0, 1e-12);
  }
}

TEST(Curvature, DyadicGridEffectiveKappa) {
  const fs::path out = scratch("dyadic");
  const Json cfg = {{"n", 6}, {"model", {{"rule", {{"name", "dyadic_grid"}, {"params", {{"J", 4}, {"D", 16}}}}}}}};
  ASSERT_EQ(run("curvature", cfg, out), kOk);
  const Json s = Json::parse(slurp(out / "summary.json"));
  // kappa_t = 1/2 at every step; the effective rate 1 / (2 - 2^-n) tends to 1/2.
  for (const auto& row : read_csv(out / "curvature.csv")) {
    if (row[0] != "t") {
      EXPECT_NEAR(std::stod(row[1]), 0.5, 1e-12);
    }
  }
  EXPECT_NEAR(s["kappa"]["value"].get<double>(), 1.0 / (2.0 - 1.0 / 64), 1e-12);
  const Json m = Json::parse(slurp(out / "manifest.json"));
  bool listed = false;
  for (const auto& f : m["outputs"]) {
    if (f["file"] != "curvature.csv") continue;
    listed = true;
    EXPECT_EQ(f["sha256"].get<std::string>(), sha256_hex(slurp(out / "curvature.csv")));
  }
  EXPECT_TRUE(listed);
}

TEST(Bounds, EventEmptyFlagCrossesOscillation) {
  const fs::path out = scratch("bounds");
  const Json cfg = {{"params", {{"m", 2}, {"n", 100}, {"L", 1}, {"D", 1}, {"delta_op", 0.5}, {"delta_f", 0.8},
                                {"kappa", 0.3}, {"lambda", 0.4}, {"sigma_inf", 1}, {"kappa_tilde", 0.3}}},
                    {"eps", {0.25, 0.5, 0.5000001, 0.75, 1.5}},
                    {"delta", 0.01}};
  ASSERT_EQ(run("bounds", cfg, out), kOk);
  const auto rows = read_csv(out / "bounds.csv");
  ASSERT_EQ(rows.size(), 6u);
  std::size_t col = 0;
  while (col < rows[0].size() && rows[0][col] != "curv_diam_event_empty") ++col;
  ASSERT_LT(col, rows[0].size());
  EXPECT_EQ(rows[1][col], "0");
  EXPECT_EQ(rows[2][col], "0");
  EXPECT_EQ(rows[3][col], "1");
  EXPECT_EQ(rows[4][col], "1");
  EXPECT_EQ(rows[5][col], "1");
}

TEST(Bounds, MissingParametersAreReportedNotFatal) {
  const fs::path out = scratch("bounds_missing");
  ASSERT_EQ(run("bounds", {{"params", {{"m", 2}, {"n", 100}, {"L", 1}, {"D", 1}, {"kappa", 0.3}}}, {"eps", {0.2}}},
                out),
            kOk);
  const Json s = Json::parse(slurp(out / "summary.json"));
  EXPECT_TRUE(s["unavailable"].contains("spec"));
  EXPECT_EQ(run("bounds", {{"params", {{"m", 2}}}}, scratch("bounds_noeps")), kConfigError);
}

TEST(Simulate, ConstantObservablesGiveZeroTail) {
  const fs::path out = scratch("sim_const");
  const Json cfg = {{"n", 8},
                    {"reps", 500},
                    {"seed", 3},
                    {"model", {{"size", 3}, {"points", {0, 1, 2}}, {"rule", {{"name", "random_inhomogeneous"},
                                                                            {"params", {{"seed", 4}}}}}}},
                    {"observables", {{"kind", "constant"}, {"value", {{1, 0}, {0, -1}}}}},
                    {"eps", {0.1, 0.5}}};
  ASSERT_EQ(run("simulate", cfg, out), kOk);
  const auto rows = read_csv(out / "tail.csv");
  ASSERT_EQ(rows.size(), 3u);
  const std::vector<std::string> header{"eps",    "count",  "N",          "p_hat",       "ci_lo",
                                        "ci_hi",  "bound_curv", "bound_spec", "bound_olv_pt", "bound_olv_avg"};
  EXPECT_EQ(rows[0], header);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_EQ(rows[r][1], "0");
    for (std::size_t c = 6; c < rows[r].size(); ++c)
      if (!rows[r][c].empty()) {
        EXPECT_GE(std::stod(rows[r][c]), 0.0);
      }
  }
}

TEST(Simulate, ThreadCountDoesNotChangeOutputs) {
  const Json cfg = {{"n", 20},
                    {"reps", 3000},
                    {"seed", 11},
                    {"model", {{"size", 3}, {"points", {0, 1, 2}}, {"mu0", {1, 0, 0}},
                               {"rule", {{"name", "random_inhomogeneous"}, {"params", {{"seed", 5}}}}}}},
                    {"observables", {{"kind", "random"}, {"m", 2}, {"horizon", 20}, {"seed", 6}}}};
  const fs::path a = scratch("sim_t1");
  const fs::path b = scratch("sim_t4");
  ASSERT_EQ(run("simulate", cfg, a, 1), kOk);
  ASSERT_EQ(run("simulate", cfg, b, 4), kOk);
  for (const char* f : {"tail.csv", "events.csv", "summary.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Elo, BadConfigIsAConfigError) {
  const Json cfg = {{"n", 4}, {"M", 2}, {"eta", 0.2}, {"nu", 0.2}, {"T", 10}, {"reps", 2}, {"eps", 1}, {"delta", 0.1},
                    {"C_sweep", {1}}, {"env", {{"kind", "ar-contract"}}}};
  EXPECT_EQ(run("elo", cfg, scratch("elo_bad")), kConfigError);
  Json ok = cfg;
  ok["eta"] = 0.1;
  ok["T"] = 50;
  ok["env"]["params"] = {{"radius", 0.1}};
  const fs::path out = scratch("elo_ok");
  const int code = run("elo", ok, out);
  EXPECT_TRUE(code == kOk || code == kVerificationFailure);
  EXPECT_EQ(read_csv(out / "elo_steps.csv").size(), 51u);
  EXPECT_EQ(read_csv(out / "elo_steps.csv")[0], (std::vector<std::string>{"t", "mean_err2", "lemma_rhs", "min_ci", "max_ci"}));
}

TEST(Verify, ShippedSeedPasses) {
  const fs::path out = scratch("verify");
  EXPECT_EQ(run("verify", {{"seed", 2026}, {"count", 30}}, out), kOk);
  const auto rows = read_csv(out / "verify.csv");
  EXPECT_GT(rows.size(), 12u);
  const Json s = Json::parse(slurp(out / "summary.json"));
  for (const auto& [k, v] : s["checks"].items()) EXPECT_TRUE(v.get<bool>()) << k;
}

TEST(Execute, UnknownCommand) {
  EXPECT_EQ(run("frobnicate", Json::object(), scratch("unknown")), kConfigError);
}

#ifdef MCB_LAB_BINARY
int shell(const std::string& args) {
  const int status = std::system((std::string(MCB_LAB_BINARY) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

TEST(Binary, ExitCodes) {
  const fs::path dir = scratch("binary");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "bad.json") << "{ not json";
    std::ofstream(dir / "verify.json") << R"({"seed": 7, "count": 10})";
  }
  EXPECT_EQ(shell("verify --config " + (dir / "bad.json").string() + " --out " + (dir / "o1").string()), 2);
  EXPECT_EQ(shell("verify --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(shell("verify --config " + (dir / "verify.json").string() + " --out " + (dir / "o2").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o2" / "manifest.json"));
  EXPECT_EQ(shell("verify --config " + (dir / "verify.json").string() + " --seed 9 --out " + (dir / "o3").string()),
            0);
  const Json s = Json::parse(slurp(dir / "o3" / "summary.json"));
  EXPECT_EQ(s["seed"].get<std::string>(), "9");
}
#endif

}  // namespace
}  // namespace mcb::cli
