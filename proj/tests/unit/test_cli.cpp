#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace evo;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("evopagator-cli-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::vector<std::string> kQuickInvariants{"model=constant", "level_min=1", "level_max=3", "samples=5"};

}  // namespace

TEST(ApplyKey, TypeChecksValues) {
  auto cfg = default_config(StudyKind::kInvariants);
  cli::apply_key(cfg, "samples", 7);
  EXPECT_EQ(cfg.samples, 7);
  cli::apply_key(cfg, "horizon", 2);  // integers are fine for doubles
  EXPECT_EQ(cfg.horizon, 2.0);
  EXPECT_THROW(cli::apply_key(cfg, "samples", 1.5), cli::ConfigError);
  EXPECT_THROW(cli::apply_key(cfg, "samples", "many"), cli::ConfigError);
  EXPECT_THROW(cli::apply_key(cfg, "model", 3), cli::ConfigError);
  EXPECT_THROW(cli::apply_key(cfg, "sample", 3), cli::ConfigError);
  EXPECT_THROW(cli::apply_key(cfg, "alphas", json::array({0.5, "x"})), cli::ConfigError);
}

TEST(ResolveConfigs, DocumentAndOverrides) {
  const json doc = {{"invariants", {{"samples", 9}}}, {"converge", {{"level_max", 8}}}};
  const auto all = cli::resolve_configs("all", doc, {"seed=5", "converge.level_min=3"});
  ASSERT_EQ(all.size(), 6u);
  EXPECT_EQ(all[0].study, StudyKind::kInvariants);
  EXPECT_EQ(all[0].samples, 9);
  for (const auto& c : all) EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(all[1].level_min, 3);
  EXPECT_EQ(all[1].level_max, 8);

  const auto one = cli::resolve_configs("converge", doc, {"model=random-lipschitz"});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].model, "random-lipschitz");

  EXPECT_THROW(cli::resolve_configs("all", json{{"bogus", json::object()}}, {}), cli::ConfigError);
  EXPECT_THROW(cli::resolve_configs("converge", json{{"converge", {{"nope", 1}}}}, {}), cli::ConfigError);
  EXPECT_THROW(cli::resolve_configs("converge", doc, {"no_equals_sign"}), cli::ConfigError);
  EXPECT_THROW(cli::resolve_configs("converge", doc, {"grid_size=100"}), cli::ConfigError);
  EXPECT_THROW(cli::resolve_configs("converge", doc, {"dyson.wat=1"}), cli::ConfigError);
}

TEST(Run, UnknownSubcommandIsConfigError) {
  EXPECT_EQ(invoke({"bogus"}).code, cli::kConfigError);
  EXPECT_EQ(invoke({}).code, cli::kConfigError);
}

TEST(Run, UnknownKeyIsConfigError) {
  TempDir dir("unknown");
  const auto r = invoke({"--output-dir", dir.path.string(), "invariants", "not_a_key=1"});
  EXPECT_EQ(r.code, cli::kConfigError);
  EXPECT_NE(r.err.find("not_a_key"), std::string::npos);
}

TEST(Run, MissingConfigFileIsConfigError) {
  EXPECT_EQ(invoke({"--config", "/nonexistent/cfg.json", "invariants"}).code, cli::kConfigError);
}

TEST(Run, MalformedConfigFileIsConfigError) {
  TempDir dir("malformed");
  fs::create_directories(dir.path);
  const auto file = dir.path / "cfg.json";
  std::ofstream(file) << "{ not json";
  EXPECT_EQ(invoke({"--config", file.string(), "invariants"}).code, cli::kConfigError);
}

TEST(Run, WritesCsvAndSummary) {
  TempDir dir("ok");
  std::vector<std::string> args{"--output-dir", dir.path.string(), "--no-timestamp", "invariants"};
  args.insert(args.end(), kQuickInvariants.begin(), kQuickInvariants.end());
  const auto r = invoke(args);
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const std::string csv = slurp(dir.path / "invariants.csv");
  EXPECT_EQ(csv.rfind("study,level,mesh,metric,value,provenance\n", 0), 0u);
  const json summary = json::parse(slurp(dir.path / "summary.json"));
  EXPECT_FALSE(summary.contains("generated_at"));
  EXPECT_EQ(summary["studies"]["invariants"]["passed"], true);
}

TEST(Run, ConfigFileAndCustomOutputName) {
  TempDir dir("file");
  fs::create_directories(dir.path);
  const auto file = dir.path / "cfg.json";
  std::ofstream(file) << json{{"invariants", {{"model", "constant"}, {"level_min", 1}, {"level_max", 2},
                                              {"samples", 3}, {"output", "inv.csv"}}}}
                             .dump();
  const auto r = invoke({"--config", file.string(), "--output-dir", dir.path.string(), "invariants"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(fs::exists(dir.path / "inv.csv"));
  EXPECT_TRUE(json::parse(slurp(dir.path / "summary.json")).contains("generated_at"));
}

TEST(Run, ViolationExitsWithOneAndNamesTheRow) {
  TempDir dir("violation");
  // A tolerance no computation can meet forces cocycle violations.
  std::vector<std::string> args{"--output-dir", dir.path.string(), "invariants", "model=lipschitz-2x2",
                                "level_min=1", "level_max=2", "samples=4", "residual_tolerance=1e-300"};
  const auto r = invoke(args);
  EXPECT_EQ(r.code, cli::kViolation);
  EXPECT_NE(r.err.find("invariant violation: " + (dir.path / "invariants.csv").string() + ":"), std::string::npos)
      << r.err;
}

TEST(Run, OutputIsDeterministic) {
  TempDir a("det-a"), b("det-b");
  for (const auto* dir : {&a, &b}) {
    std::vector<std::string> args{"--output-dir", dir->path.string(), "--no-timestamp", "invariants"};
    args.insert(args.end(), kQuickInvariants.begin(), kQuickInvariants.end());
    ASSERT_EQ(invoke(args).code, cli::kOk);
  }
  EXPECT_EQ(slurp(a.path / "invariants.csv"), slurp(b.path / "invariants.csv"));
  EXPECT_EQ(slurp(a.path / "summary.json"), slurp(b.path / "summary.json"));
}
