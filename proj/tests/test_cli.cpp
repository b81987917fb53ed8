#include "conelab/cli.hpp"
#include "conelab/config.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace conelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("conelab_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, VerifyBubblePasses) {
  const fs::path dir = scratch("bubble");
  const Outcome r = run({"verify-bubble", "--n", "3", "--p", "2", "--cone", "full", "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kPass) << r.out << r.err;
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "reports" / "verify-bubble__pde.csv"));
  std::ifstream in(dir / "summary.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["metadata"]["subcommand"], "verify-bubble");
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["config"]["n"], 3);
  fs::remove_all(dir);
}

TEST(Cli, ExponentOutOfRangeIsSchemaError) {
  const Outcome r = run({"verify-bubble", "--p", "3", "--n", "2", "--out", scratch("bad").string()});
  EXPECT_EQ(r.code, cli::kSchema);
  EXPECT_NE(r.err.find("require 1<p<n"), std::string::npos) << r.err;
}

TEST(Cli, UnknownFlagAndMissingSubcommand) {
  EXPECT_EQ(run({"verify-norm", "--bogus", "1"}).code, cli::kSchema);
  EXPECT_EQ(run({"--n", "3"}).code, cli::kSchema);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kSchema);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.json";
  std::ofstream(cfg) << R"({"n": 4, "p": 2, "cone": {"kind": "half"}, "seed": 9})";
  const Outcome r = run({"verify-norm", "--config", cfg.string(), "--seed", "5", "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, cli::kPass) << r.err;
  std::ifstream in(dir / "out" / "summary.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["config"]["n"], 4);
  EXPECT_EQ(j["config"]["seed"], 5);
  EXPECT_EQ(j["config"]["cone"]["kind"], "half");
  fs::remove_all(dir);
}

TEST(Cli, MalformedConfigIsSchemaError) {
  const fs::path dir = scratch("malformed");
  fs::create_directories(dir);
  std::ofstream(dir / "a.json") << R"({"n": "three"})";
  std::ofstream(dir / "b.json") << R"({"n": 3, "colour": 1})";
  std::ofstream(dir / "c.json") << R"({"n": 3,)";
  for (const char* f : {"a.json", "b.json", "c.json"}) {
    const Outcome r = run({"verify-norm", "--config", (dir / f).string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.code, cli::kSchema) << f;
    EXPECT_EQ(r.err.rfind("error:", 0), 0u) << r.err;
  }
  EXPECT_EQ(run({"verify-norm", "--config", (dir / "missing.json").string()}).code, cli::kSchema);
  fs::remove_all(dir);
}

TEST(Cli, FailingReportGivesExitOne) {
  // A tolerance scale far below 1 turns every upper-bound row that is not exact into a failure.
  const fs::path dir = scratch("fail");
  const Outcome r = run({"verify-bubble", "--tol-scale", "1e-12", "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kFail) << r.out;
  EXPECT_NE(r.out.find("FAIL verify-bubble"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Config, RoundTripAndValidation) {
  RunConfig c = parse_config(R"({"n": 5, "p": 2.5, "norm": {"family": "blend", "q": 6, "eps": 0.25},
                                 "cone": {"kind": "circular", "half_aperture": 0.5}, "lambda": 2})");
  EXPECT_EQ(c.n, 5);
  EXPECT_DOUBLE_EQ(c.norm.q, 6.0);
  EXPECT_NO_THROW(validate(c));
  const RunConfig back = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));

  RunConfig bad = c;
  bad.p = 5.0;
  EXPECT_THROW(validate(bad), SchemaError);
  bad = c;
  bad.lambda = -1.0;
  EXPECT_THROW(validate(bad), SchemaError);
  bad = c;
  bad.weight.kind = "monomial";
  bad.weight.exponents = {1.0};
  EXPECT_THROW(validate(bad), SchemaError);  // weight needs an orthant
  bad.cone = ConeSpec{};
  bad.cone.kind = "orthant";
  bad.cone.rank = 1;
  bad.a = 2.0;
  EXPECT_THROW(validate(bad), SchemaError);  // a disagrees with the weight degree
}
