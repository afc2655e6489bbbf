#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "wbflow/run.hpp"

using namespace wbflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json load(const std::string& name) {
  std::ifstream in(std::string(WBFLOW_CONFIG_DIR) + "/" + name);
  return json::parse(in);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wbflow_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(DensitySpec, Primitives) {
  auto g = build_grid_1d(4);
  EXPECT_EQ(density_values(g, json(2.5)), std::vector<double>(4, 2.5));
  EXPECT_EQ(density_values(g, json{{"cells", {1, 2, 3, 4}}}), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(density_values(g, json{{"point_mass", {{"cell", 2}, {"mass", 0.5}}}}), (std::vector<double>{0, 0, 2, 0}));
  const auto affine = density_values(g, json{{"affine", {{"offset", 1.0}, {"slope", {2.0}}}}});
  EXPECT_DOUBLE_EQ(affine[0], 1.25);
  EXPECT_DOUBLE_EQ(affine[3], 2.75);
  const auto collar = density_values(g, json{{"collar", {{"width", 0.2}, {"inside", 3}, {"outside", 1}}}});
  EXPECT_EQ(collar, (std::vector<double>{3, 1, 1, 3}));
  const auto sum = density_values(g, json{{"sum", {1.0, {{"constant", 2.0}}}}});
  EXPECT_EQ(sum, std::vector<double>(4, 3.0));
  const auto bump = density_values(g, json{{"sine_bump", {{"amplitude", 1.0}}}});
  EXPECT_NEAR(bump[0], std::sin(std::numbers::pi / 8), 1e-15);
}

TEST(DensitySpec, Errors) {
  auto g = build_grid_1d(4);
  EXPECT_THROW(density_values(g, json{{"cells", {1, 2}}}), invalid_input);
  EXPECT_THROW(density_values(g, json{{"bogus", 1}}), invalid_input);
  EXPECT_THROW(density_values(g, json{{"point_mass", {{"cell", 9}, {"mass", 1}}}}), invalid_input);
  EXPECT_THROW(density_from_json(g, json{{"cells", {1, 2, -3, 4}}}, "mu"), invalid_input);
}

TEST(Run, DistanceManifest) {
  const fs::path dir = scratch("distance");
  const RunResult r = run(load("distance.json"), dir.string(), std::nullopt, nullptr);
  const json& m = r.manifest;
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(m.at("schema_version"), 1);
  EXPECT_NEAR(m.at("results").at("wb2_squared").get<double>(), 0.03125, 1e-12);
  EXPECT_NEAR(m.at("results").at("w").get<double>(), 0.75, 1e-12);
  for (const auto& name : m.at("outputs")) EXPECT_TRUE(fs::exists(dir / name.get<std::string>()));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  std::ifstream plan(dir / "plan.csv");
  std::string header;
  std::getline(plan, header);
  EXPECT_EQ(header, "kind,source,target,mass");
}

TEST(Run, StationaryJko) {
  const RunResult r = run(load("jko_stationary.json"), scratch("jko").string(), std::nullopt, nullptr);
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(r.manifest.at("results").at("stationary").get<bool>());
  EXPECT_EQ(r.manifest.at("results").at("steps"), 4);
}

TEST(Run, Reproducible) {
  const json cfg = load("diagnose.json");
  const fs::path da = scratch("rep_a"), db = scratch("rep_b");
  const RunResult a = run(cfg, da.string(), std::nullopt, nullptr);
  const RunResult b = run(cfg, db.string(), std::nullopt, nullptr);
  EXPECT_EQ(a.manifest.at("results"), b.manifest.at("results"));
  EXPECT_EQ(a.manifest.at("config_hash"), b.manifest.at("config_hash"));
  std::ifstream fa(da / "curve.csv"), fb(db / "curve.csv");
  const std::string ca((std::istreambuf_iterator<char>(fa)), {}), cb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_FALSE(ca.empty());
  EXPECT_EQ(ca, cb);
}

TEST(Run, InvalidConfigWritesNothing) {
  const fs::path dir = scratch("invalid");
  json cfg = load("pde.json");
  cfg["dt"] = -1.0;
  EXPECT_THROW(run(cfg, dir.string(), std::nullopt, nullptr), invalid_input);
  EXPECT_FALSE(fs::exists(dir));
  cfg = load("pde.json");
  cfg["command"] = "nonsense";
  EXPECT_THROW(run(cfg, dir.string(), std::nullopt, nullptr), invalid_input);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  const std::string cli = WBFLOW_CLI_PATH;
  const std::string ok = cli + " --config " + WBFLOW_CONFIG_DIR + "/distance.json --out " + dir.string() + " > /dev/null";
  EXPECT_EQ(std::system(ok.c_str()), 0);
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"command": "distance"})";
  const std::string fail = cli + " --config " + bad.string() + " > /dev/null 2>&1";
  const int status = std::system(fail.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
