// Command-line driver for the quantum-ergodicity laboratory.
//
// Subcommands: gen, identities, ergodicity, bs-check, anderson.
// Common flags: --config FILE, --seed N, --out DIR, --threads N
// (QERGO_THREADS is honored when --threads is absent).

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "qergo/runner.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = 0;
};

void add_common(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)");
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--threads", opts.threads,
                  "worker threads (QERGO_THREADS fallback, default 1)");
}

qergo::RunConfig resolve(const CliOptions& opts) {
  qergo::RunConfig cfg = opts.config_path.empty()
                             ? qergo::RunConfig{}
                             : qergo::RunConfig::from_file(opts.config_path);
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.threads > 0) {
    cfg.threads = opts.threads;
  } else if (const char* env = std::getenv("QERGO_THREADS")) {
    cfg.threads = std::max(1, std::atoi(env));
  }
  return cfg;
}

int report(const qergo::CommandResult& result) {
  std::cout << (result.ok ? "OK: " : "FAIL: ") << result.message << '\n';
  return result.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qergo: numerical laboratory for quantum ergodicity on graphs"};
  app.require_subcommand(1);

  CliOptions opts;
  CLI::App* gen = app.add_subcommand("gen", "sample a graph and potential");
  CLI::App* identities =
      app.add_subcommand("identities", "run the exact-identity battery");
  CLI::App* ergodicity = app.add_subcommand(
      "ergodicity", "quantum-variance ladder over graph sizes");
  CLI::App* bs_check = app.add_subcommand(
      "bs-check", "empirical spectral measures vs tree expectations");
  CLI::App* anderson = app.add_subcommand(
      "anderson", "ergodicity ladder with disorder defaults");
  for (CLI::App* cmd : {gen, identities, ergodicity, bs_check, anderson})
    add_common(cmd, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    const qergo::RunConfig cfg = resolve(opts);
    if (gen->parsed()) return report(qergo::cmd_gen(cfg));
    if (identities->parsed()) return report(qergo::cmd_identities(cfg));
    if (ergodicity->parsed()) return report(qergo::cmd_ergodicity(cfg));
    if (bs_check->parsed()) return report(qergo::cmd_bs_check(cfg));
    if (anderson->parsed()) return report(qergo::cmd_anderson(cfg));
  } catch (const qergo::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "unexpected error: " << err.what() << '\n';
    return 3;
  }
  return 0;
}
