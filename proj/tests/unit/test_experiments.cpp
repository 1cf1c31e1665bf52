#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "toricq/errors.hpp"
#include "toricq/experiments.hpp"
#include "toricq/io.hpp"

using namespace toricq;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_config() {
  return {{"u0", {{"poly", nlohmann::json::array()}}},
          {"u1", {{"poly", {0.0, 0.0, 0.5}}}},
          {"flavor", "hilb"},
          {"k_list", {4, 8, 16}},
          {"t_grid", {0.0, 0.5, 1.0}},
          {"symbols", {"x", "sin(pi x)"}}};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("toricq_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(ExperimentConfig, ParsesAndHashesCanonicalForm) {
  const ExperimentConfig a = ExperimentConfig::from_json(base_config());
  EXPECT_EQ(a.k_list.size(), 3u);
  EXPECT_EQ(a.symbols.size(), 2u);
  nlohmann::json moved = base_config();
  moved["output_dir"] = "elsewhere";
  EXPECT_EQ(ExperimentConfig::from_json(moved).hash(), a.hash());
  nlohmann::json changed = base_config();
  changed["k_list"] = {4, 8, 32};
  EXPECT_NE(ExperimentConfig::from_json(changed).hash(), a.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(ExperimentConfig, RejectsInvalidInput) {
  auto expect_bad = [](nlohmann::json j) { EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError) << j.dump(); };
  nlohmann::json j = base_config();
  j["k_list"] = {8, 4};
  expect_bad(j);
  j = base_config();
  j["t_grid"] = {0.0, 1.5};
  expect_bad(j);
  j = base_config();
  j["flavor"] = "adjoint";
  j["k_list"] = {1, 4};
  expect_bad(j);
  j = base_config();
  j["unknown"] = 1;
  expect_bad(j);
  j = base_config();
  j.erase("u1");
  expect_bad(j);
  j = base_config();
  j["symbols"] = {"tan(x)"};
  expect_bad(j);
  j = base_config();
  j["quadrature"] = {{"radial_nodes", 3}};
  expect_bad(j);
  j = base_config();
  j["u1"] = {{"poly", {0.0, 0.0, -5.0}}};
  EXPECT_THROW(ExperimentConfig::from_json(j), Error);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST(FitRate, ExactPowerLaws) {
  std::vector<std::pair<double, double>> inv, logk, flat;
  for (int k = 8; k <= 256; k *= 2) {
    inv.emplace_back(k, 3.0 / k);
    logk.emplace_back(k, std::log(k) / k);
    flat.emplace_back(k, 0.25);
  }
  EXPECT_NEAR(fit_rate(inv).slope, -1.0, 1e-12);
  EXPECT_NEAR(fit_rate(inv).intercept, std::log(3.0), 1e-12);
  const double s = fit_rate(logk).slope;
  EXPECT_GT(s, -1.0);
  EXPECT_LT(s, -0.7);
  EXPECT_NEAR(fit_rate(flat).slope, 0.0, 1e-12);
  EXPECT_THROW(fit_rate({{1, 1.0}, {2, 0.5}}), DomainError);
  EXPECT_THROW(fit_rate({{1, 1.0}, {2, 0.0}, {4, 0.5}}), DomainError);
}

TEST(RunStudy, TranslationFamilyIsExact) {
  nlohmann::json j = base_config();
  j["u1"] = {{"poly", {0.7}}};
  const StudyResult r = run_study(ExperimentConfig::from_json(j), 1);
  for (const ResultRow& row : r.rows) {
    ASSERT_TRUE(row.ok) << row.error;
    EXPECT_LE(row.get("w1"), 1e-10);
    EXPECT_NEAR(row.get("geodesic_distance"), 0.7, 1e-10);
    EXPECT_NEAR(row.get("z_over_kd"), 0.7, 1e-10);
  }
}

TEST(RunStudy, IdenticalEndpointsGiveZeroDiagnostics) {
  nlohmann::json j = base_config();
  j["u1"] = j["u0"];
  const StudyResult r = run_study(ExperimentConfig::from_json(j), 1);
  for (const ResultRow& row : r.rows) {
    ASSERT_TRUE(row.ok) << row.error;
    EXPECT_EQ(row.get("pinch_min"), 0.0);
    EXPECT_EQ(row.get("pinch_max"), 0.0);
    EXPECT_EQ(row.get("w1"), 0.0);
    EXPECT_EQ(row.get("geodesic_distance"), 0.0);
  }
}

TEST(RunStudy, DeterministicAcrossWorkerCounts) {
  const ExperimentConfig c = ExperimentConfig::from_json(base_config());
  const std::string one = run_study(c, 1).to_csv();
  EXPECT_EQ(run_study(c, 3).to_csv(), one);
  EXPECT_EQ(run_study(c, 1).to_csv(), one);
}

TEST(RunStudy, RowsCarryHashAndVersion) {
  const ExperimentConfig c = ExperimentConfig::from_json(base_config());
  const StudyResult r = run_study(c, 1);
  const nlohmann::json j = r.to_json();
  for (const auto& row : j.at("rows")) {
    EXPECT_EQ(row.at("config_hash"), c.hash());
    EXPECT_EQ(row.at("version"), kVersionTag);
  }
  EXPECT_NE(r.to_csv().find(c.hash() + "," + kVersionTag), std::string::npos);
}

TEST(RunStudy, QuadraticFamilyW1Decreases) {
  nlohmann::json j = base_config();
  j["k_list"] = {8, 16, 32, 64};
  j["symbols"] = nlohmann::json::array();
  j["t_grid"] = {0.5};
  const StudyResult r = run_study(ExperimentConfig::from_json(j), 1);
  for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_LT(r.rows[i].get("w1"), r.rows[i - 1].get("w1"));
}

TEST(Execute, CachesByHashUnlessForced) {
  const fs::path dir = scratch_dir("cache");
  const ExperimentConfig c = ExperimentConfig::from_json(base_config());
  const CommandOutcome first = execute(Command::geodesic, c, dir, false, 1);
  EXPECT_FALSE(first.cache_hit);
  EXPECT_EQ(first.directory, dir / c.hash());
  EXPECT_TRUE(fs::exists(first.directory / "geodesic.csv"));
  EXPECT_TRUE(fs::exists(first.directory / "config.json"));
  const std::string before = read_text_file(first.directory / "geodesic.csv");
  EXPECT_TRUE(execute(Command::geodesic, c, dir, false, 1).cache_hit);
  const CommandOutcome forced = execute(Command::geodesic, c, dir, true, 1);
  EXPECT_FALSE(forced.cache_hit);
  EXPECT_EQ(read_text_file(first.directory / "geodesic.csv"), before);
  fs::remove_all(dir);
}

TEST(Execute, StudyWritesTablesAndPlots) {
  const fs::path dir = scratch_dir("study");
  const ExperimentConfig c = ExperimentConfig::from_json(base_config());
  const CommandOutcome r = execute(Command::study, c, dir, false, 1);
  for (const char* f : {"study.csv", "study.json", "rates.csv", "w1_vs_k.svg", "sup_deviation_vs_k.svg"})
    EXPECT_TRUE(fs::exists(r.directory / f)) << f;
  EXPECT_FALSE(r.numerical_failure);
  const std::string svg = read_text_file(r.directory / "w1_vs_k.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  fs::remove_all(dir);
}

TEST(SvgLineChart, ProducesWellFormedDocument) {
  const std::string svg =
      svg_line_chart("t", "x", "y", {{"a", {{1, 1}, {2, 4}, {4, 16}}}, {"b", {{1, 2}, {4, 3}}}}, true, true);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

#ifdef TORICQ_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TORICQ_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  const fs::path good = dir / "good.json", bad = dir / "bad.json";
  write_text_file(good, base_config().dump());
  nlohmann::json broken = base_config();
  broken["k_list"] = {8, 4};
  write_text_file(bad, broken.dump());
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("legendre --config " + good.string() + out), 0);
  EXPECT_EQ(run_cli("gram --config " + good.string() + out), 0);
  EXPECT_EQ(run_cli("gram --config " + good.string() + out + " --force"), 0);
  EXPECT_EQ(run_cli("toeplitz --config " + bad.string() + out), 2);
  EXPECT_EQ(run_cli("bergman --config " + (dir / "missing.json").string() + out), 2);
  EXPECT_EQ(run_cli("nonsense"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / ExperimentConfig::from_json(base_config()).hash() / "gram.json"));
  fs::remove_all(dir);
}
#endif

TEST(ShippedConfigs, AllParse) {
  for (const auto& entry : fs::directory_iterator(TORICQ_CONFIG_DIR))
    EXPECT_NO_THROW(ExperimentConfig::load(entry.path())) << entry.path();
}
