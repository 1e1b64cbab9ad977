#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctepa/cli.hpp"
#include "ctepa/io.hpp"

namespace fs = std::filesystem;
using ctepa::io::Json;

namespace {

struct Call {
  int code;
  std::string out, err;
};

Call call(std::vector<std::string> args) {
  args.insert(args.begin(), "ctepa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ctepa::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ctepa_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string params() { return write("p.json", R"({"k":1,"c_minus":1,"c_plus":1.1,"nu_minus":0.8,"nu_plus":0.9})"); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, NoSubcommandIsAConfigError) { EXPECT_EQ(call({}).code, ctepa::cli::kConfigError); }

TEST_F(Cli, HelpSucceeds) { EXPECT_EQ(call({"--help"}).code, ctepa::cli::kOk); }

TEST_F(Cli, RegionsWritesHeaderedDeterministicFiles) {
  const std::string p = params();
  const fs::path a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(call({"regions", "--params", p, "--out", a.string(), "--resolution", "64"}).code, 0);
  ASSERT_EQ(call({"regions", "--params", p, "--out", b.string(), "--resolution", "64"}).code, 0);
  const std::string csv = slurp(a / "curves.csv");
  EXPECT_EQ(csv.rfind("# ctepa ", 0), 0u);
  EXPECT_NE(csv.find("segment_id,w,s,G,rho\n"), std::string::npos);
  EXPECT_NE(csv.find("\nCt1,"), std::string::npos);
  EXPECT_EQ(csv, slurp(b / "curves.csv"));
  EXPECT_EQ(slurp(a / "region_meta.json"), slurp(b / "region_meta.json"));
  const Json meta = Json::parse(slurp(a / "region_meta.json"));
  EXPECT_EQ(meta["regime"]["alignment"], "weak");
  EXPECT_EQ(meta["subcritical"]["curves"].size(), 4u);
  EXPECT_TRUE(meta["admissibility"]["closes"].get<bool>());
  EXPECT_NE(csv.find(meta["config_hash"].get<std::string>()), std::string::npos);
}

TEST_F(Cli, ClassifyPrintsVerdictAndJson) {
  const Call c = call({"classify", "--params", params(), "--G", "0.5", "--rho", "2.0"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.out.rfind("subcritical: ", 0), 0u);
  const Json j = Json::parse(c.out.substr(c.out.find('\n') + 1));
  EXPECT_EQ(j["verdict"], "subcritical");
  EXPECT_DOUBLE_EQ(j["s"].get<double>(), 0.5);
  const Call sup = call({"classify", "--params", params(), "--G", "-30", "--rho", "2.0"});
  ASSERT_EQ(sup.code, 0);
  EXPECT_EQ(Json::parse(sup.out.substr(sup.out.find('\n') + 1))["verdict"], "supercritical");
}

TEST_F(Cli, ParamsSchemaIsStrict) {
  const std::string extra = write("x.json", R"({"k":1,"c_minus":1,"c_plus":1.1,"nu_minus":0.8,"nu_plus":0.9,"q":1})");
  const std::string missing = write("m.json", R"({"k":1,"c_minus":1,"c_plus":1.1,"nu_minus":0.8})");
  const std::string invalid = write("i.json", R"({"k":1,"c_minus":2,"c_plus":1,"nu_minus":0.8,"nu_plus":0.9})");
  const std::string broken = write("b.json", "{\"k\":");
  for (const std::string& f : {extra, missing, invalid, broken}) {
    const Call c = call({"classify", "--params", f, "--G", "0", "--rho", "1"});
    EXPECT_EQ(c.code, ctepa::cli::kConfigError) << f;
    EXPECT_FALSE(c.err.empty());
  }
  EXPECT_EQ(call({"classify", "--params", (dir_ / "absent.json").string(), "--G", "0", "--rho", "1"}).code,
            ctepa::cli::kConfigError);
  EXPECT_EQ(call({"classify", "--params", params(), "--G", "0", "--rho", "-1"}).code, ctepa::cli::kConfigError);
}

TEST_F(Cli, InadmissibleParamsNameTheInequality) {
  const std::string p = write("bad.json", R"({"k":1,"c_minus":0.5,"c_plus":3,"nu_minus":0.5,"nu_plus":3})");
  const Call c = call({"regions", "--params", p, "--out", (dir_ / "r").string()});
  EXPECT_EQ(c.code, ctepa::cli::kInadmissible);
  EXPECT_NE(c.err.find("AC1 fails"), std::string::npos) << c.err;
  EXPECT_NE(c.err.find("lhs="), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "r" / "curves.csv"));
}

TEST_F(Cli, SimulateWritesRegionColumn) {
  const fs::path out = dir_ / "traj.csv";
  const Call c = call({"simulate", "--params", params(), "--w0", "0.2", "--s0", "0.5", "--T", "5", "--coeff-mode",
                       "random:3", "--out", out.string()});
  ASSERT_EQ(c.code, 0) << c.err;
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# ctepa ", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, "t,w,s,region,L_active");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",subcritical,"), std::string::npos) << line;
  }
  EXPECT_GT(rows, 10);
  EXPECT_EQ(call({"simulate", "--params", params(), "--w0", "0.2", "--s0", "0.5", "--T", "5", "--coeff-mode", "bogus",
                  "--out", out.string()})
                .code,
            ctepa::cli::kConfigError);
}

TEST_F(Cli, PdeRunReportsBlowup) {
  const std::string cfg = write("pde.json", R"({"N":128,"kernel":{"family":"constant","psi":0.5},
    "background":{"family":"constant","level":1},"rho0":{"shape":"cosine","mean":1,"amplitude":0.2},
    "u0":{"shape":"sine","amplitude":-6},"T":2,"dt":0.02,"snapshots":[0.1]})");
  const fs::path out = dir_ / "run";
  const Call c = call({"pde-run", "--config", cfg, "--out", out.string()});
  ASSERT_EQ(c.code, 0) << c.err;
  const Json o = Json::parse(slurp(out / "outcome.json"));
  EXPECT_EQ(o["kind"], "blowup");
  EXPECT_EQ(o["label_verdict"], "supercritical");
  EXPECT_GT(o["initial_verdicts"]["supercritical"].get<int>(), 0);
  const std::string snaps = slurp(out / "snapshots.csv");
  EXPECT_NE(snaps.find("t,i,x,u,rho,G\n"), std::string::npos);
  EXPECT_NE(snaps.find("\n0.1,127,"), std::string::npos);

  const std::string bad = write("bad.json", R"({"N":128,"rho0":{"shape":"cosine","mean":1},"u0":{"shape":"sine"},"dx":1})");
  EXPECT_EQ(call({"pde-run", "--config", bad, "--out", out.string()}).code, ctepa::cli::kConfigError);
}

TEST_F(Cli, VerifyRunsOneSuite) {
  const fs::path report = dir_ / "v.json";
  const Call c = call({"verify", "--suite", "zero-alignment", "--seed", "7", "--out", report.string()});
  EXPECT_EQ(c.code, 0) << c.out;
  EXPECT_EQ(c.out.rfind("[PASS] 9 zero-alignment", 0), 0u) << c.out;
  EXPECT_TRUE(Json::parse(slurp(report))["results"][0]["passed"].get<bool>());
  EXPECT_EQ(call({"verify", "--suite", "nope"}).code, ctepa::cli::kConfigError);
}

TEST_F(Cli, SweepFlipsRegimeAtStrongBoundary) {
  // 2 sqrt(k c+) = 2.
  const std::string g =
      write("g.json", R"({"k":1,"c_minus":1,"c_plus":1,"nu_minus":{"from":1.9,"to":2.1,"count":3},"nu_plus":2.2})");
  const fs::path out = dir_ / "sweep.csv";
  ASSERT_EQ(call({"sweep", "--grid", g, "--out", out.string()}).code, 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_NE(rows[2].find(",ok,median,"), std::string::npos) << rows[2];
  EXPECT_NE(rows[3].find(",ok,strong,"), std::string::npos) << rows[3];
  EXPECT_NE(rows[4].find(",ok,strong,"), std::string::npos) << rows[4];
}

TEST_F(Cli, SweepChainHoldsOnAThousandCells) {
  const std::string g = write("g.json", R"({"k":[0.5,1.5],"c_minus":0.8,"c_plus":{"from":0.8,"to":1.4,"count":10},
    "nu_minus":{"from":0.2,"to":3.0,"count":10},"nu_plus":{"from":3.0,"to":4.0,"count":5}})");
  const fs::path out = dir_ / "sweep.csv";
  const Call c = call({"sweep", "--grid", g, "--out", out.string()});
  EXPECT_EQ(c.code, 0) << c.out;
  EXPECT_NE(c.out.find("1000 cells, 0 violations"), std::string::npos) << c.out;
}

TEST_F(Cli, OneCellSweepMatchesClassify) {
  const std::string g = write("g.json", R"({"k":1,"c_minus":1,"c_plus":1.1,"nu_minus":0.8,"nu_plus":0.9})");
  const fs::path out = dir_ / "sweep.csv";
  ASSERT_EQ(call({"sweep", "--grid", g, "--out", out.string()}).code, 0);
  const std::string text = slurp(out);
  EXPECT_NE(text.find("\n1,1,1.1,0.8,0.9,ok,weak,II,IV,1,1,1,1,1,"), std::string::npos) << text;
}

TEST(Io, ConfigHashIgnoresKeyOrder) {
  const Json a = Json::parse(R"({"k":1,"c_minus":1,"nu":[1,2]})");
  const Json b = Json::parse(R"({"nu":[1,2],"c_minus":1,"k":1})");
  EXPECT_EQ(ctepa::io::config_hash(a), ctepa::io::config_hash(b));
  EXPECT_NE(ctepa::io::config_hash(a), ctepa::io::config_hash(Json::parse(R"({"k":1,"c_minus":1,"nu":[2,1]})")));
  EXPECT_EQ(ctepa::io::config_hash(a).size(), 16u);
}

TEST(Io, ParamsRoundTrip) {
  const ctepa::Params p{1.5, 0.7, 0.9, 0.3, 0.6};
  EXPECT_EQ(ctepa::io::params_from_json(ctepa::io::to_json(p)), p);
}
