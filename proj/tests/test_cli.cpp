#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fdrexp_cli/commands.hpp"

namespace fs = std::filesystem;
using fdrexp::Json;
using fdrexp::cli::run_cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const char* base = std::getenv("FDREXP_TEST_TMP");
  fs::path dir = base ? fs::path(base) : fs::temp_directory_path() / "fdrexp_cli_tests";
  dir /= name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(CliThreshold, Examples) {
  const auto dir = scratch("threshold");
  write_file(dir / "a.csv", "x\n3.0\n1.0\n0.5\n0.2\n");
  const auto r = run({"threshold", "--input", (dir / "a.csv").string(), "--q", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["k_fdr"], 1);
  EXPECT_NEAR(j["threshold"].get<double>(), 2.0794, 1e-4);

  write_file(dir / "tiny.csv", "x\n0.01\n0.02\n0.03\n");
  const auto none = Json::parse(run({"threshold", "--input", (dir / "tiny.csv").string(), "--q", "0.5"}).out);
  EXPECT_EQ(none["threshold"], "inf");
  EXPECT_EQ(none["k_fdr"], 0);

  write_file(dir / "empty.csv", "");
  EXPECT_EQ(run({"threshold", "--input", (dir / "empty.csv").string()}).code, 2);
  EXPECT_EQ(run({"threshold", "--input", (dir / "missing.csv").string()}).code, 2);
  EXPECT_EQ(run({"threshold", "--input", (dir / "a.csv").string(), "--q", "1.5"}).code, 2);
  write_file(dir / "bad.csv", "y\n1\n");
  EXPECT_EQ(run({"threshold", "--input", (dir / "bad.csv").string()}).code, 2);
}

TEST(CliFunctional, Examples) {
  const auto r = run({"functional", "--eps", "0.01", "--mu", "10", "--q", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "5.12791168538\n");
  const auto degenerate = run({"functional", "--eps", "0.5", "--mu", "1", "--q", "0.5"});
  EXPECT_EQ(degenerate.code, 3);
  EXPECT_NE(degenerate.err.find("degenerate mixture"), std::string::npos);
  EXPECT_EQ(run({"functional", "--eps", "0", "--mu", "10"}).code, 3);
  const double near_one = std::stod(run({"functional", "--eps", "0.01", "--mu", "10", "--q", "0.999"}).out);
  // Just above the image bound log(1/q) ≈ 0.001.
  EXPECT_GT(near_one, -std::log(0.999));
  EXPECT_LT(near_one, 0.2);
  EXPECT_EQ(run({"functional", "--eps", "0.01"}).code, 2);
}

TEST(CliFunctional, MixtureJsonAndBounds) {
  const auto r = run({"functional", "--mixture", R"({"support":[1,10],"weights":[0.99,0.01]})", "--q",
                      "0.5", "--bounds"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j["threshold"].get<double>(), 5.12791168538, 1e-10);
  EXPECT_LT(j["lower"].get<double>(), 5.128);
  EXPECT_GT(j["upper"].get<double>(), 5.127);
  EXPECT_EQ(run({"functional", "--mixture", "{not json"}).code, 2);
}

TEST(CliConfigFile, PreSeedsFlagsAndFlagsWin) {
  const auto dir = scratch("config");
  write_file(dir / "run.ini", "[functional]\neps=0.01\nmu=10\nq=0.25\n");
  const auto cfg = (dir / "run.ini").string();
  const auto base = run({"--config", cfg, "functional"});
  ASSERT_EQ(base.code, 0) << base.err;
  const auto override = run({"--config", cfg, "functional", "--q", "0.5"});
  EXPECT_EQ(override.out, "5.12791168538\n");
  EXPECT_NE(base.out, override.out);
}

TEST(CliEnvelope, Examples) {
  const auto bias = run({"envelope", "--problem", "bias", "--p", "1", "--eta", "1e-3", "--t", "10.2306"});
  ASSERT_EQ(bias.code, 0) << bias.err;
  const auto jb = Json::parse(bias.out);
  EXPECT_EQ(jb["regime"], "ratio-finite");
  EXPECT_GT(jb["value"].get<double>(), 0.0);
  const double mu_star = jb["mu_star"].get<double>();
  EXPECT_GT(mu_star, 1.0);
  EXPECT_LT(mu_star, 10.2306);

  const auto var = Json::parse(run({"envelope", "--problem", "variance", "--p", "1.5"}).out);
  EXPECT_EQ(var["regime"], "ratio-infinite");
  EXPECT_TRUE(var["mu_lower"].is_number());

  const auto h = run({"envelope", "--problem", "hstar", "--t", "0.5", "--q", "0.5"});
  ASSERT_EQ(h.code, 0) << h.err;
  const auto jh = Json::parse(h.out);
  EXPECT_GT(jh["value"].get<double>(), 0.0);
  EXPECT_FALSE(jh["crosses_level"].get<bool>());

  EXPECT_EQ(run({"envelope", "--problem", "nope"}).code, 2);
  EXPECT_EQ(run({"envelope"}).code, 2);
}

TEST(CliRiskCurve, QuickModeIsReproducible) {
  const auto dir = scratch("curve");
  const std::vector<std::string> args{"risk-curve", "--reps", "1", "--n", "100", "--q", "0.25,0.5",
                                      "--seed", "5", "--out", (dir / "a").string()};
  const auto start = std::chrono::steady_clock::now();
  const auto r = run(args);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(1));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "a" / "risk_curve_q0.25.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "risk_curve_q0.5.csv"));
  const auto manifest = Json::parse(slurp(dir / "a" / "risk_curve_manifest.json"));
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_EQ(manifest["outputs"].size(), 2u);

  auto again = args;
  again.back() = (dir / "b").string();
  ASSERT_EQ(run(again).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "risk_curve_q0.25.csv"), slurp(dir / "b" / "risk_curve_q0.25.csv"));
}

TEST(CliRiskCurve, UncalibratablePointsBecomeNan) {
  const auto dir = scratch("curve_nan");
  const auto r = run({"risk-curve", "--eta", "0.5", "--mu-min", "1.2", "--mu-max", "3", "--reps", "1",
                      "--n", "50", "--q", "0.5", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_NE(slurp(dir / "risk_curve_q0.5.csv").find("nan"), std::string::npos);
}

TEST(CliSeed, EnvironmentOverridesDefault) {
  const auto dir = scratch("seed");
  const std::vector<std::string> base{"risk-curve", "--reps", "1", "--n", "200", "--q", "0.5",
                                      "--mu-max", "4"};
  auto with_out = [&](const std::string& name) {
    auto a = base;
    a.push_back("--out");
    a.push_back((dir / name).string());
    return a;
  };
  ::unsetenv("FDR_SEED");
  ASSERT_EQ(run(with_out("default")).code, 0);
  EXPECT_EQ(Json::parse(slurp(dir / "default" / "risk_curve_manifest.json"))["seed"],
            fdrexp::cli::kDefaultSeed);
  ::setenv("FDR_SEED", "777", 1);
  ASSERT_EQ(run(with_out("env")).code, 0);
  EXPECT_EQ(Json::parse(slurp(dir / "env" / "risk_curve_manifest.json"))["seed"], 777);
  auto flag = with_out("flag");
  flag.insert(flag.end(), {"--seed", "9"});
  ASSERT_EQ(run(flag).code, 0);
  EXPECT_EQ(Json::parse(slurp(dir / "flag" / "risk_curve_manifest.json"))["seed"], 9);
  ::setenv("FDR_SEED", "abc", 1);
  EXPECT_EQ(run(with_out("bad")).code, 2);
  ::unsetenv("FDR_SEED");
}

TEST(CliConvergence, ArgumentChecksAndOutput) {
  const auto dir = scratch("conv");
  EXPECT_EQ(run({"convergence", "--n-list", "1000,10000"}).code, 2);
  EXPECT_EQ(run({"convergence", "--reps", "0"}).code, 2);
  const auto out = (dir / "c.csv").string();
  const auto r = run({"convergence", "--n-list", "200,2000,20000", "--reps", "20", "--seed", "3",
                      "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(std::stod(r.out), 0.0);
  EXPECT_TRUE(fs::exists(out + ".manifest.json"));
  const auto first = slurp(out);
  ASSERT_EQ(run({"convergence", "--n-list", "200,2000,20000", "--reps", "20", "--seed", "3", "--out",
                 out})
                .code,
            0);
  EXPECT_EQ(slurp(out), first);
}

TEST(CliScanAndAsymptotics, Output) {
  const auto scan = run({"scan", "--eta", "1e-3", "--points", "20"});
  ASSERT_EQ(scan.code, 0) << scan.err;
  EXPECT_EQ(scan.out.rfind("mu,eps,threshold,bias,variance,total\n", 0), 0u);
  EXPECT_EQ(std::count(scan.out.begin(), scan.out.end(), '\n'), 21);
  EXPECT_EQ(run({"scan", "--mu-min", "1"}).code, 2);

  const auto asym = run({"asymptotics", "--p", "1", "--eta", "1e-3", "--q", "0.5"});
  ASSERT_EQ(asym.code, 0) << asym.err;
  const auto j = Json::parse(asym.out);
  for (const char* key : {"t0", "tq_star", "tq_star_formula", "rate", "mu_b_star", "mu_v_star"}) {
    EXPECT_TRUE(j[key].is_number()) << key;
  }
  EXPECT_NEAR(j["t0"].get<double>(), 10.2306, 1e-4);
}

TEST(CliUsage, ErrorsMapToExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"functional", "--q", "abc"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}
