#include "qergo/runner.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qergo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("qergo_" + tag);
  fs::remove_all(dir);
  return dir;
}

RunConfig tiny_identities_config(const std::string& tag) {
  RunConfig cfg;
  cfg.out_dir = fresh_dir(tag).string();
  cfg.seed = 11;
  cfg.instances = 2;
  cfg.max_n = 40;
  cfg.grid_lambdas = {-2.0, 1.0};
  cfg.grid_etas = {0.5, 0.1};
  cfg.path_sample = 40;
  cfg.sample_k = 2;
  cfg.step5_instances = 1;
  cfg.step5_max_n = 24;
  return cfg;
}

}  // namespace

TEST(Config, DefaultsRoundTripThroughJson) {
  const RunConfig def;
  const RunConfig back = RunConfig::from_json(def.to_json());
  EXPECT_EQ(back.to_json().dump(), def.to_json().dump());
}

TEST(Config, UnknownKeysAreHardErrors) {
  EXPECT_THROW(RunConfig::from_json(json::parse(R"({"bogus": 1})")),
               ConfigError);
  EXPECT_THROW(
      RunConfig::from_json(json::parse(R"({"ensemble": {"sigma": 2}})")),
      ConfigError);
  EXPECT_THROW(
      RunConfig::from_json(json::parse(R"({"gamma": {"eta0": 1.5}})")),
      ConfigError);
}

TEST(Config, PartialFilesKeepDefaults) {
  const RunConfig cfg = RunConfig::from_json(
      json::parse(R"({"ensemble": {"n": 64}, "gamma": {"eta0": 0.2}})"));
  EXPECT_EQ(cfg.n, 64);
  EXPECT_DOUBLE_EQ(cfg.eta0, 0.2);
  EXPECT_EQ(cfg.degree, 3);
  EXPECT_EQ(cfg.n_ladder, (std::vector<int>{250, 500, 1000, 2000}));
}

TEST(CmdGen, WritesParsableInstance) {
  RunConfig cfg;
  cfg.out_dir = fresh_dir("gen").string();
  cfg.n = 40;
  cfg.seed = 4;
  const CommandResult res = cmd_gen(cfg);
  EXPECT_TRUE(res.ok);
  std::ifstream is(fs::path(cfg.out_dir) / "graph.txt");
  const Graph g = Graph::parse(is);
  EXPECT_EQ(g.vertex_count(), 40);
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "manifest.json"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "potential.csv"));
}

TEST(CmdIdentities, PassesAtDefaultBoundAndIsDeterministic) {
  RunConfig cfg = tiny_identities_config("ident_a");
  const CommandResult res = cmd_identities(cfg);
  EXPECT_TRUE(res.ok) << res.message;
  const std::string first = slurp(fs::path(cfg.out_dir) / "residuals.csv");

  RunConfig cfg2 = tiny_identities_config("ident_b");
  cmd_identities(cfg2);
  const std::string second = slurp(fs::path(cfg2.out_dir) / "residuals.csv");
  EXPECT_EQ(first, second);
  EXPECT_FALSE(first.empty());
}

TEST(Manifest, ReplayingTheConfigEchoReproducesCsvBytes) {
  RunConfig cfg = tiny_identities_config("replay_a");
  cmd_identities(cfg);
  const std::string first = slurp(fs::path(cfg.out_dir) / "residuals.csv");

  // reload the config straight from the emitted manifest
  std::ifstream is(fs::path(cfg.out_dir) / "manifest.json");
  json manifest;
  is >> manifest;
  RunConfig replay = RunConfig::from_json(manifest.at("config"));
  replay.out_dir = fresh_dir("replay_b").string();
  cmd_identities(replay);
  EXPECT_EQ(first, slurp(fs::path(replay.out_dir) / "residuals.csv"));
}

TEST(CmdIdentities, UnattainableToleranceFailsCleanly) {
  RunConfig cfg = tiny_identities_config("ident_tight");
  cfg.identity_bound = 1e-15;  // below the floating-point floor
  const CommandResult res = cmd_identities(cfg);
  EXPECT_FALSE(res.ok);
  EXPECT_NE(res.message.find("exceeds bound"), std::string::npos);
}

TEST(CmdErgodicity, TinyLadderProducesConsistentCsv) {
  RunConfig cfg;
  cfg.out_dir = fresh_dir("ergo").string();
  cfg.seed = 3;
  cfg.n_ladder = {40, 60};
  cfg.seeds_per_n = 2;
  cfg.interval_lo = -2.0;
  cfg.interval_hi = 2.0;
  const auto outcome = run_ergodicity(cfg);
  EXPECT_TRUE(outcome.result.ok);
  EXPECT_EQ(outcome.medians.size(), 2u);
  // zero disorder on a regular graph: <1_Lambda>_gamma = 1/2 exactly
  EXPECT_NEAR(outcome.min_weighted_average, 0.5, 1e-9);

  const std::string csv = slurp(fs::path(cfg.out_dir) / "variance_vs_n.csv");
  EXPECT_NE(csv.find("n,seed,variance,min_weighted_average"),
            std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "variance.csv"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "variance_trend.svg"));
}

TEST(CmdErgodicity, ConstantObservableCenteringMakesZeroVariance) {
  // a identically 1 would give exactly zero variance; the shipped observable
  // is the half indicator, so instead check the exact-centering consequence
  // <term> = |corr - 1/2| with corr in [0,1].
  RunConfig cfg;
  cfg.out_dir = fresh_dir("ergo0").string();
  cfg.seed = 8;
  cfg.n_ladder = {30};
  cfg.seeds_per_n = 1;
  const auto outcome = run_ergodicity(cfg);
  EXPECT_TRUE(outcome.result.ok);
  EXPECT_LE(outcome.medians[0], 1.0);
}

TEST(CmdErgodicity, ThreadCountDoesNotChangeBytes) {
  auto run_with = [](int threads, const std::string& tag) {
    RunConfig cfg;
    cfg.out_dir = fresh_dir(tag).string();
    cfg.seed = 19;
    cfg.n_ladder = {30, 40};
    cfg.seeds_per_n = 2;
    cfg.threads = threads;
    run_ergodicity(cfg);
    return slurp(fs::path(cfg.out_dir) / "variance.csv");
  };
  EXPECT_EQ(run_with(1, "ergo_t1"), run_with(4, "ergo_t4"));
}

TEST(CmdBsCheck, ZeroDisorderEmitsKsAndDensity) {
  RunConfig cfg;
  cfg.out_dir = fresh_dir("bs").string();
  cfg.seed = 2;
  cfg.n = 150;
  cfg.pool_size = 4000;
  cfg.burn_in = 120;
  cfg.grid_step = 0.25;
  cfg.chi_centers = {0.0};
  cfg.phi_ks = {0, 1};
  const CommandResult res = cmd_bs_check(cfg);
  EXPECT_TRUE(res.ok) << res.message;
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "density.csv"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "pd_density.csv"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "empirical_vs_tree.csv"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "phi_hist_k0.csv"));

  const std::string manifest = slurp(fs::path(cfg.out_dir) / "manifest.json");
  EXPECT_NE(manifest.find("ks_distance"), std::string::npos);
}

TEST(CliBinary, SmokeTestAndExitCodes) {
  const char* cli = std::getenv("QERGO_CLI");
  ASSERT_NE(cli, nullptr) << "QERGO_CLI must point at the built binary";

  const fs::path dir = fresh_dir("cli");
  const fs::path cfg_path = dir / "config.json";
  fs::create_directories(dir);
  {
    RunConfig cfg = tiny_identities_config("cli_run");
    cfg.out_dir = (dir / "run1").string();
    std::ofstream os(cfg_path);
    os << cfg.to_json().dump(2);
  }
  const std::string base = std::string(cli) + " identities --config " +
                           cfg_path.string();
  EXPECT_EQ(std::system((base + " > /dev/null").c_str()), 0);

  // rerun into another directory: identical CSV bytes
  const int rc = std::system(
      (base + " --out " + (dir / "run2").string() + " > /dev/null").c_str());
  EXPECT_EQ(rc, 0);
  EXPECT_EQ(slurp(dir / "run1" / "residuals.csv"),
            slurp(dir / "run2" / "residuals.csv"));

  // unknown config key is a hard error
  {
    std::ofstream os(dir / "bad.json");
    os << R"({"no_such_key": true})";
  }
  const int bad = std::system((std::string(cli) + " identities --config " +
                               (dir / "bad.json").string() +
                               " 2> /dev/null > /dev/null")
                                  .c_str());
  EXPECT_NE(bad, 0);
}
