#ifndef QERGO_RUNNER_HPP
#define QERGO_RUNNER_HPP

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qergo/cover_green.hpp"
#include "qergo/ensembles.hpp"
#include "qergo/ergodicity.hpp"
#include "qergo/errors.hpp"
#include "qergo/graph.hpp"
#include "qergo/limit_diagnostics.hpp"
#include "qergo/spectral.hpp"
#include "qergo/step5.hpp"
#include "qergo/util.hpp"

namespace qergo {

using json = nlohmann::ordered_json;

// Full experiment configuration. Every field has a default; unknown keys in
// a config file are hard errors.
struct RunConfig {
  std::string out_dir = "qergo-out";
  std::uint64_t seed = 1;
  int threads = 1;

  // ensemble
  int n = 500;
  int degree = 3;
  double epsilon = 0.0;
  std::string nu = "uniform";
  std::vector<double> support;
  double min_expander_gap = 0.0;  // instances below this get flagged

  // gamma policy
  double eta0 = 0.1;
  double interval_lo = -2.5;
  double interval_hi = 2.5;

  // observable
  std::string observable = "half-indicator";

  // ergodicity / anderson experiment
  std::vector<int> n_ladder = {250, 500, 1000, 2000};
  int seeds_per_n = 5;
  bool assert_trend = false;
  double trend_ratio_bound = 0.6;
  double min_average_bound = -1.0;  // asserted when nonnegative

  // identities battery
  int instances = 20;
  int max_n = 200;
  int min_deg = 3;
  int max_deg = 6;
  std::vector<double> grid_lambdas = {-4.0, -2.0, 0.0, 2.0, 4.0};
  std::vector<double> grid_etas = {1.0, 0.1, 0.01};
  double solve_tol = 1e-12;
  double identity_bound = 1e-8;
  int path_sample = 200;
  int sample_k = 3;
  bool run_step5 = true;
  int step5_instances = 10;
  int step5_max_n = 60;

  // Benjamini-Schramm checks
  int pool_size = 100000;
  int burn_in = 300;
  double bs_eta = 0.02;
  double chi_width = 0.3;
  std::vector<double> chi_centers = {0.0, 1.0, -1.0};
  double grid_step = 0.1;
  bool assert_ks = false;
  double ks_bound = 0.05;
  bool assert_evt = false;
  double evt_abs_bound = 0.02;
  double evt_se_multiplier = 3.0;
  std::vector<int> phi_ks = {0, 1, 2};
  double phi_lambda = 0.0;

  // budgets
  std::int64_t path_budget = kDefaultPathBudget;
  int size_cap = kDefaultEigensolveSizeCap;

  EnsembleConfig ensemble(std::uint64_t instance_seed) const {
    EnsembleConfig cfg;
    cfg.n = n;
    cfg.degree = degree;
    cfg.epsilon = epsilon;
    cfg.support = support;
    cfg.seed = instance_seed;
    if (nu == "uniform")
      cfg.nu = BaseDistribution::kUniform;
    else if (nu == "bernoulli")
      cfg.nu = BaseDistribution::kBernoulli;
    else if (nu == "discrete-list")
      cfg.nu = BaseDistribution::kDiscreteList;
    else
      throw ConfigError("unknown base distribution: " + nu);
    return cfg;
  }

  json to_json() const;
  static RunConfig from_json(const json& j);
  static RunConfig from_file(const std::string& path);
};

namespace detail {

inline void check_keys(const json& obj, const std::string& scope,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("unknown key \"" + item.key() + "\" in " + scope);
  }
}

template <typename T>
void load(const json& obj, const char* key, T& field) {
  if (obj.contains(key)) field = obj.at(key).get<T>();
}

}  // namespace detail

inline json RunConfig::to_json() const {
  json j;
  j["out"] = out_dir;
  j["seed"] = seed;
  j["threads"] = threads;
  j["ensemble"] = {{"n", n},
                   {"degree", degree},
                   {"epsilon", epsilon},
                   {"nu", nu},
                   {"support", support},
                   {"min_expander_gap", min_expander_gap}};
  j["gamma"] = {{"eta0", eta0}, {"interval", {interval_lo, interval_hi}}};
  j["observable"] = observable;
  j["experiment"] = {{"n_ladder", n_ladder},
                     {"seeds_per_n", seeds_per_n},
                     {"assert_trend", assert_trend},
                     {"trend_ratio_bound", trend_ratio_bound},
                     {"min_average_bound", min_average_bound}};
  j["identities"] = {{"instances", instances},
                     {"max_n", max_n},
                     {"min_deg", min_deg},
                     {"max_deg", max_deg},
                     {"grid_lambdas", grid_lambdas},
                     {"grid_etas", grid_etas},
                     {"solve_tol", solve_tol},
                     {"identity_bound", identity_bound},
                     {"path_sample", path_sample},
                     {"sample_k", sample_k},
                     {"run_step5", run_step5},
                     {"step5_instances", step5_instances},
                     {"step5_max_n", step5_max_n}};
  j["bs"] = {{"pool_size", pool_size},
             {"burn_in", burn_in},
             {"eta", bs_eta},
             {"chi_width", chi_width},
             {"chi_centers", chi_centers},
             {"grid_step", grid_step},
             {"assert_ks", assert_ks},
             {"ks_bound", ks_bound},
             {"assert_evt", assert_evt},
             {"evt_abs_bound", evt_abs_bound},
             {"evt_se_multiplier", evt_se_multiplier},
             {"phi_ks", phi_ks},
             {"phi_lambda", phi_lambda}};
  j["budgets"] = {{"path_budget", path_budget}, {"size_cap", size_cap}};
  return j;
}

inline RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  detail::check_keys(j, "config root",
                     {"out", "seed", "threads", "ensemble", "gamma",
                      "observable", "experiment", "identities", "bs",
                      "budgets"});
  detail::load(j, "out", cfg.out_dir);
  detail::load(j, "seed", cfg.seed);
  detail::load(j, "threads", cfg.threads);
  detail::load(j, "observable", cfg.observable);
  if (j.contains("ensemble")) {
    const json& e = j.at("ensemble");
    detail::check_keys(e, "ensemble",
                       {"n", "degree", "epsilon", "nu", "support",
                        "min_expander_gap"});
    detail::load(e, "n", cfg.n);
    detail::load(e, "degree", cfg.degree);
    detail::load(e, "epsilon", cfg.epsilon);
    detail::load(e, "nu", cfg.nu);
    detail::load(e, "support", cfg.support);
    detail::load(e, "min_expander_gap", cfg.min_expander_gap);
  }
  if (j.contains("gamma")) {
    const json& g = j.at("gamma");
    detail::check_keys(g, "gamma", {"eta0", "interval"});
    detail::load(g, "eta0", cfg.eta0);
    if (g.contains("interval")) {
      const auto iv = g.at("interval").get<std::vector<double>>();
      if (iv.size() != 2) throw ConfigError("gamma.interval needs two values");
      cfg.interval_lo = iv[0];
      cfg.interval_hi = iv[1];
    }
  }
  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    detail::check_keys(e, "experiment",
                       {"n_ladder", "seeds_per_n", "assert_trend",
                        "trend_ratio_bound", "min_average_bound"});
    detail::load(e, "n_ladder", cfg.n_ladder);
    detail::load(e, "seeds_per_n", cfg.seeds_per_n);
    detail::load(e, "assert_trend", cfg.assert_trend);
    detail::load(e, "trend_ratio_bound", cfg.trend_ratio_bound);
    detail::load(e, "min_average_bound", cfg.min_average_bound);
  }
  if (j.contains("identities")) {
    const json& e = j.at("identities");
    detail::check_keys(e, "identities",
                       {"instances", "max_n", "min_deg", "max_deg",
                        "grid_lambdas", "grid_etas", "solve_tol",
                        "identity_bound", "path_sample", "sample_k",
                        "run_step5", "step5_instances", "step5_max_n"});
    detail::load(e, "instances", cfg.instances);
    detail::load(e, "max_n", cfg.max_n);
    detail::load(e, "min_deg", cfg.min_deg);
    detail::load(e, "max_deg", cfg.max_deg);
    detail::load(e, "grid_lambdas", cfg.grid_lambdas);
    detail::load(e, "grid_etas", cfg.grid_etas);
    detail::load(e, "solve_tol", cfg.solve_tol);
    detail::load(e, "identity_bound", cfg.identity_bound);
    detail::load(e, "path_sample", cfg.path_sample);
    detail::load(e, "sample_k", cfg.sample_k);
    detail::load(e, "run_step5", cfg.run_step5);
    detail::load(e, "step5_instances", cfg.step5_instances);
    detail::load(e, "step5_max_n", cfg.step5_max_n);
  }
  if (j.contains("bs")) {
    const json& e = j.at("bs");
    detail::check_keys(e, "bs",
                       {"pool_size", "burn_in", "eta", "chi_width",
                        "chi_centers", "grid_step", "assert_ks", "ks_bound",
                        "assert_evt", "evt_abs_bound", "evt_se_multiplier",
                        "phi_ks", "phi_lambda"});
    detail::load(e, "pool_size", cfg.pool_size);
    detail::load(e, "burn_in", cfg.burn_in);
    detail::load(e, "eta", cfg.bs_eta);
    detail::load(e, "chi_width", cfg.chi_width);
    detail::load(e, "chi_centers", cfg.chi_centers);
    detail::load(e, "grid_step", cfg.grid_step);
    detail::load(e, "assert_ks", cfg.assert_ks);
    detail::load(e, "ks_bound", cfg.ks_bound);
    detail::load(e, "assert_evt", cfg.assert_evt);
    detail::load(e, "evt_abs_bound", cfg.evt_abs_bound);
    detail::load(e, "evt_se_multiplier", cfg.evt_se_multiplier);
    detail::load(e, "phi_ks", cfg.phi_ks);
    detail::load(e, "phi_lambda", cfg.phi_lambda);
  }
  if (j.contains("budgets")) {
    const json& e = j.at("budgets");
    detail::check_keys(e, "budgets", {"path_budget", "size_cap"});
    detail::load(e, "path_budget", cfg.path_budget);
    detail::load(e, "size_cap", cfg.size_cap);
  }
  if (!(cfg.eta0 > 0.0 && cfg.eta0 < 1.0))
    throw ConfigError("gamma.eta0 must lie in (0,1)");
  if (cfg.interval_lo >= cfg.interval_hi)
    throw ConfigError("gamma.interval must be nonempty");
  if (cfg.path_budget <= 0 || cfg.size_cap <= 0)
    throw ConfigError("budgets must be positive");
  return cfg;
}

inline RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------

class RunManifest {
 public:
  explicit RunManifest(const RunConfig& cfg) {
    doc_["tool"] = "qergo";
    doc_["version"] = "0.1.0";
    doc_["config"] = cfg.to_json();
    doc_["tolerances"] = {{"solve_tol", cfg.solve_tol},
                          {"identity_bound", cfg.identity_bound},
                          {"eigensolve_residual_tol", kDefaultResidualTol}};
    doc_["notes"] = {{"potential_regularity",
                      "Holder continuity of nu is a hypothesis of the limit "
                      "theorems; recorded here, not checkable from samples"},
                     {"degenerate_eigenspaces",
                      "per-eigenvalue variance terms depend on the solver's "
                      "basis inside degenerate eigenspaces; multiplicities "
                      "are recoverable from the lambda_j column"}};
    doc_["csv_schemas"] = json::object();
    doc_["timings_ms"] = json::object();
    doc_["summary"] = json::object();
    start_ = std::chrono::steady_clock::now();
  }

  void schema(const std::string& file, const std::string& columns) {
    doc_["csv_schemas"][file] = columns;
  }

  void timing(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    doc_["timings_ms"][stage] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now - start_)
            .count();
  }

  json& summary() { return doc_["summary"]; }

  void write(const std::filesystem::path& dir) const {
    std::ofstream os(dir / "manifest.json");
    os << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

struct CommandResult {
  bool ok = true;
  std::string message;
};

namespace detail {

inline std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::uint64_t instance_seed(std::uint64_t master,
                                   const std::string& label, int index) {
  SplitMix64 mix(master ^ hash_label(label) ^
                 (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index + 1)));
  return mix.next();
}

// half-size vertex subset, drawn uniformly from the instance stream
inline std::vector<bool> random_half_subset(int n, std::uint64_t seed) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng = derive_stream(seed, "lambda-set");
  shuffle(order, rng);
  std::vector<bool> in_set(n, false);
  for (int i = 0; i < n / 2; ++i) in_set[order[i]] = true;
  return in_set;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// gen: emit one sampled instance (graph + potential) with its manifest.

inline CommandResult cmd_gen(const RunConfig& cfg) {
  const auto dir = detail::prepare_out_dir(cfg);
  RunManifest manifest(cfg);

  const EnsembleConfig ecfg = cfg.ensemble(cfg.seed);
  const Graph g = random_regular(ecfg);
  const Potential w = sample_potential(g, ecfg);

  {
    std::ofstream os(dir / "graph.txt");
    g.emit(os);
  }
  {
    std::ofstream os(dir / "potential.csv");
    os << "x,w\n";
    for (int x = 0; x < g.vertex_count(); ++x)
      os << x << ',' << format_double(w.values[x]) << '\n';
  }
  manifest.schema("graph.txt", "first line N M, then M lines \"u v\"");
  manifest.schema("potential.csv", "x,w");
  const double beta = expander_gap(g);
  manifest.summary()["expander_gap"] = beta;
  manifest.summary()["expander_gap_flagged"] = beta < cfg.min_expander_gap;
  manifest.summary()["bst_profile_r3"] = bst_profile(g, 3);
  manifest.timing("total");
  manifest.write(dir);
  return {true, "instance written to " + dir.string()};
}

// ---------------------------------------------------------------------------
// identities: the exact-identity battery over a randomized instance matrix.

inline CommandResult cmd_identities(const RunConfig& cfg) {
  const auto dir = detail::prepare_out_dir(cfg);
  RunManifest manifest(cfg);

  std::ostringstream csv;
  csv << "instance,n,lambda,eta,identity,residual\n";
  double worst = 0.0;
  auto row = [&](int inst, int n, double lambda, double eta,
                 const std::string& name, double value) {
    csv << inst << ',' << n << ',' << format_double(lambda) << ','
        << format_double(eta) << ',' << name << ',' << format_double(value)
        << '\n';
    worst = std::max(worst, value);
  };

  struct InstanceData {
    Graph g;
    OrientedEdgeSet es;
    Potential w;
    int n;
  };
  std::vector<InstanceData> instances;
  SplitMix64 size_rng = derive_stream(cfg.seed, "identity-sizes");
  for (int i = 0; i < cfg.instances; ++i) {
    const int n = cfg.max_n <= 30
                      ? cfg.max_n
                      : 30 + static_cast<int>(size_rng.below(cfg.max_n - 29));
    const std::uint64_t seed = detail::instance_seed(cfg.seed, "identity", i);
    Graph g = random_degree_bounded(n, cfg.min_deg, cfg.max_deg, seed);
    EnsembleConfig pot;
    pot.n = n;
    pot.epsilon = 1.0;  // A = 1
    pot.nu = BaseDistribution::kUniform;
    pot.seed = seed;
    Potential w = sample_potential(g, pot);
    OrientedEdgeSet es = oriented_edges(g);
    instances.push_back({std::move(g), std::move(es), std::move(w), n});
  }

  // cover-green battery over the gamma grid
  for (int i = 0; i < static_cast<int>(instances.size()); ++i) {
    const auto& in = instances[i];
    std::vector<NbPath> sample;
    for_each_nb_path(in.g, cfg.sample_k, [&](const NbPath& p) {
      if (static_cast<int>(sample.size()) < cfg.path_sample)
        sample.push_back(p);
    });
    for (const double lambda : cfg.grid_lambdas) {
      for (const double eta : cfg.grid_etas) {
        ZetaField zf;
        try {
          zf = solve_zeta(in.g, in.es, in.w, cplx(lambda, eta),
                          {cfg.solve_tol, 50000, nullptr});
        } catch (const NoConvergenceError&) {
          zf = continuation_solve(in.g, in.es, in.w, lambda, eta,
                                  cfg.solve_tol);
        }
        const IdentityReport rep =
            identity_residuals(in.g, in.es, in.w, zf, sample);
        row(i, in.n, lambda, eta, "green3", rep.green3);
        row(i, in.n, lambda, eta, "mv", rep.mv);
        row(i, in.n, lambda, eta, "sumzeta", rep.sumzeta);
        row(i, in.n, lambda, eta, "idpsi", rep.idpsi);
        row(i, in.n, lambda, eta, "psiiden1", rep.psiiden1);
        row(i, in.n, lambda, eta, "psiiden2", rep.psiiden2);
        row(i, in.n, lambda, eta, "multigreen3", rep.multigreen3);
        row(i, in.n, lambda, eta, "greensym", rep.greensym);
      }
    }
  }
  manifest.timing("cover_green_battery");

  // step-5 operator battery on smaller instances
  if (cfg.run_step5) {
    for (int i = 0; i < cfg.step5_instances; ++i) {
      const std::uint64_t seed = detail::instance_seed(cfg.seed, "step5", i);
      SplitMix64 size_rng2(seed);
      const int n =
          20 + static_cast<int>(size_rng2.below(
                   std::max(1, cfg.step5_max_n - 19)));
      Graph g = random_degree_bounded(n, cfg.min_deg, cfg.max_deg, seed);
      EnsembleConfig pot;
      pot.n = n;
      pot.epsilon = 1.0;
      pot.nu = BaseDistribution::kUniform;
      pot.seed = seed;
      const Potential w = sample_potential(g, pot);
      const OrientedEdgeSet es = oriented_edges(g);
      const EigenSystem spec = eigensystem(g, w, kDefaultResidualTol,
                                           cfg.size_cap);
      ZetaPolicy policy(g, es, w, cfg.solve_tol);
      Step5SuiteOptions opts;
      opts.seed = seed;
      const Step5IdentityReport rep =
          step5_identity_suite(g, es, spec, policy, cfg.eta0, opts);
      row(cfg.instances + i, n, 0.0, cfg.eta0, "pasinitial", rep.pasinitial);
      row(cfg.instances + i, n, 0.0, cfg.eta0, "telescoping", rep.telescoping);
      row(cfg.instances + i, n, 0.0, cfg.eta0, "passuperieur_t",
          rep.passuperieur_t);
      row(cfg.instances + i, n, 0.0, cfg.eta0, "passuperieur_t_tilde",
          rep.passuperieur_t_tilde);
      row(cfg.instances + i, n, 0.0, cfg.eta0, "passuperieur_higher",
          rep.passuperieur_higher);
      row(cfg.instances + i, n, 0.0, cfg.eta0, "check_o1", rep.check_o1);
      row(cfg.instances + i, n, 0.0, cfg.eta0, "check_o1_tilde",
          rep.check_o1_tilde);
      row(cfg.instances + i, n, 0.0, cfg.eta0, "gammav", rep.gammav);
    }
    manifest.timing("step5_battery");
  }

  {
    std::ofstream os(dir / "residuals.csv");
    os << csv.str();
  }
  manifest.schema("residuals.csv", "instance,n,lambda,eta,identity,residual");
  manifest.summary()["max_residual"] = worst;
  manifest.summary()["bound"] = cfg.identity_bound;
  manifest.timing("total");
  manifest.write(dir);

  if (worst > cfg.identity_bound)
    return {false, "max residual " + format_double(worst) + " exceeds bound " +
                       format_double(cfg.identity_bound)};
  return {true, "max residual " + format_double(worst)};
}

// ---------------------------------------------------------------------------
// ergodicity / anderson: the quantum-variance-vs-N experiment.

struct ErgodicityOutcome {
  CommandResult result;
  std::vector<double> medians;  // per rung of the N ladder
  double min_weighted_average = 1e300;
};

inline ErgodicityOutcome run_ergodicity(const RunConfig& cfg) {
  const auto dir = detail::prepare_out_dir(cfg);
  RunManifest manifest(cfg);

  if (cfg.observable != "half-indicator")
    throw ConfigError("unsupported observable: " + cfg.observable);

  struct Cell {
    int n = 0;
    int seed_index = 0;
    double aggregate = 0.0;
    double min_wavg = 1e300;
    std::string rows;  // per-j CSV fragment
  };
  std::vector<Cell> cells;
  for (const int n : cfg.n_ladder)
    for (int s = 0; s < cfg.seeds_per_n; ++s)
      cells.push_back({n, s, 0.0, 1e300, ""});

  parallel_for(
      static_cast<int>(cells.size()), cfg.threads, [&](int idx) {
        Cell& cell = cells[idx];
        const std::uint64_t seed = detail::instance_seed(
            cfg.seed, "ergodicity", cell.n * 1000 + cell.seed_index);
        EnsembleConfig ecfg = cfg.ensemble(seed);
        ecfg.n = cell.n;
        const Graph g = random_regular(ecfg);
        const Potential w = sample_potential(g, ecfg);
        const OrientedEdgeSet es = oriented_edges(g);
        const EigenSystem spec =
            eigensystem(g, w, kDefaultResidualTol, cfg.size_cap);
        const std::vector<bool> in_set =
            detail::random_half_subset(cell.n, seed);

        ZetaPolicy policy(g, es, w, 1e-10);
        const Interval interval{cfg.interval_lo, cfg.interval_hi};
        std::ostringstream rows;
        double total = 0.0;
        int count = 0;
        for (int j = 0; j < spec.size(); ++j) {
          if (!interval.contains(spec.lambda(j))) continue;
          const ZetaField& zf = policy.solve(cplx(spec.lambda(j), cfg.eta0));
          double navg = 0.0, nlam = 0.0;
          for (int x = 0; x < cell.n; ++x) {
            navg += zf.n_gamma[x];
            if (in_set[x]) nlam += zf.n_gamma[x];
          }
          const double wavg = nlam / navg;
          double corr = 0.0;
          for (int x = 0; x < cell.n; ++x)
            if (in_set[x]) corr += spec.psi(j, x) * spec.psi(j, x);
          const double term = std::abs(corr - wavg);
          total += term;
          ++count;
          cell.min_wavg = std::min(cell.min_wavg, wavg);
          rows << cell.n << ',' << cell.seed_index << ',' << j << ','
               << format_double(spec.lambda(j)) << ',' << format_double(term)
               << ',' << format_double(wavg) << ",1\n";
        }
        (void)count;
        cell.aggregate = total / cell.n;
        cell.rows = rows.str();
      });

  std::ofstream per_j(dir / "variance.csv");
  per_j << "n,seed,j,lambda_j,term,weighted_average,centered_flag\n";
  for (const Cell& cell : cells) per_j << cell.rows;

  std::ofstream per_cell(dir / "variance_vs_n.csv");
  per_cell << "n,seed,variance,min_weighted_average\n";
  double min_wavg = 1e300;
  std::map<int, std::vector<double>> by_n;
  for (const Cell& cell : cells) {
    per_cell << cell.n << ',' << cell.seed_index << ','
             << format_double(cell.aggregate) << ','
             << format_double(cell.min_wavg) << '\n';
    by_n[cell.n].push_back(cell.aggregate);
    min_wavg = std::min(min_wavg, cell.min_wavg);
  }

  ErgodicityOutcome out;
  out.min_weighted_average = min_wavg;
  json medians = json::array();
  for (const int n : cfg.n_ladder) {
    auto vals = by_n[n];
    std::sort(vals.begin(), vals.end());
    const std::size_t m = vals.size();
    const double median = m % 2 == 1
                              ? vals[m / 2]
                              : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
    out.medians.push_back(median);
    medians.push_back({{"n", n}, {"median_variance", median}});
  }

  // simple vector plot of the median trend
  {
    std::ofstream svg(dir / "variance_trend.svg");
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" "
           "height=\"300\" viewBox=\"0 0 400 300\">\n";
    double vmax = 1e-12;
    for (const double v : out.medians) vmax = std::max(vmax, v);
    svg << "<polyline fill=\"none\" stroke=\"black\" points=\"";
    for (std::size_t i = 0; i < out.medians.size(); ++i) {
      const double x = 40.0 + 320.0 * i / std::max<std::size_t>(
                                              1, out.medians.size() - 1);
      const double y = 280.0 - 260.0 * out.medians[i] / vmax;
      svg << x << ',' << y << ' ';
    }
    svg << "\"/>\n</svg>\n";
  }

  manifest.schema("variance.csv",
                  "n,seed,j,lambda_j,term,weighted_average,centered_flag");
  manifest.schema("variance_vs_n.csv", "n,seed,variance,min_weighted_average");
  manifest.summary()["medians"] = medians;
  manifest.summary()["min_weighted_average"] = min_wavg;
  manifest.timing("total");

  out.result.ok = true;
  if (cfg.assert_trend && out.medians.size() >= 2) {
    const double first = out.medians.front();
    const double last = out.medians.back();
    int inversions = 0;
    for (std::size_t i = 0; i + 1 < out.medians.size(); ++i)
      if (out.medians[i + 1] > out.medians[i]) ++inversions;
    if (!(last <= cfg.trend_ratio_bound * first) || inversions > 1) {
      out.result.ok = false;
      out.result.message = "variance trend assertion failed";
    }
  }
  if (cfg.min_average_bound >= 0.0 && min_wavg < cfg.min_average_bound) {
    out.result.ok = false;
    out.result.message += " min weighted average " + format_double(min_wavg) +
                          " below bound";
  }
  manifest.summary()["assertions_ok"] = out.result.ok;
  manifest.write(dir);
  if (out.result.ok && out.result.message.empty())
    out.result.message = "variance ladder complete";
  return out;
}

inline CommandResult cmd_ergodicity(const RunConfig& cfg) {
  return run_ergodicity(cfg).result;
}

// anderson: the same protocol with disorder switched on by default.
inline CommandResult cmd_anderson(RunConfig cfg) {
  if (cfg.epsilon == 0.0) cfg.epsilon = 0.5;
  if (cfg.min_average_bound < 0.0) cfg.min_average_bound = 0.2;
  return run_ergodicity(cfg).result;
}

// ---------------------------------------------------------------------------
// bs-check: spectral-measure convergence diagnostics.

inline CommandResult cmd_bs_check(const RunConfig& cfg) {
  const auto dir = detail::prepare_out_dir(cfg);
  RunManifest manifest(cfg);

  const EnsembleConfig ecfg = cfg.ensemble(cfg.seed);
  const Graph g = random_regular(ecfg);
  const Potential w = sample_potential(g, ecfg);
  const OrientedEdgeSet es = oriented_edges(g);
  const EigenSystem spec = eigensystem(g, w, kDefaultResidualTol, cfg.size_cap);
  const int q = cfg.degree - 1;
  manifest.timing("eigensolve");

  CommandResult result{true, ""};

  // Kesten-McKay comparison for the zero-disorder baseline.
  const double edge = 2.0 * std::sqrt(static_cast<double>(q));
  if (cfg.epsilon == 0.0) {
    std::vector<double> lambdas(spec.size());
    for (int j = 0; j < spec.size(); ++j) lambdas[j] = spec.lambda(j);
    const double ks = ks_distance(
        lambdas, [&](double x) { return kesten_mckay_cdf(q, x); });
    manifest.summary()["ks_distance"] = ks;
    if (cfg.assert_ks && ks > cfg.ks_bound) {
      result.ok = false;
      result.message += "KS distance " + format_double(ks) + " above bound; ";
    }
    std::ofstream density(dir / "density.csv");
    density << "lambda,km_density\n";
    for (double x = -edge; x <= edge + 1e-12; x += cfg.grid_step)
      density << format_double(x) << ','
              << format_double(kesten_mckay_density(q, x)) << '\n';
    manifest.schema("density.csv", "lambda,km_density");
  }
  manifest.timing("kesten_mckay");

  // Empirical averages against the population-dynamics tree estimate.
  const double support_halfwidth =
      edge + cfg.epsilon * ecfg.nu_bound() + 0.5;
  const PopulationDynamicsOracle oracle(q, ecfg, cfg.pool_size, cfg.burn_in);
  int grid_points =
      static_cast<int>(std::ceil(2.0 * support_halfwidth / cfg.grid_step)) + 1;
  if (grid_points % 2 == 0) ++grid_points;
  const auto grid = oracle.density_grid(-support_halfwidth, support_halfwidth,
                                        cfg.bs_eta, grid_points);
  manifest.timing("population_dynamics");

  {
    std::ofstream pd(dir / "pd_density.csv");
    pd << "lambda,density,std_error\n";
    for (std::size_t i = 0; i < grid.lambdas.size(); ++i)
      pd << format_double(grid.lambdas[i]) << ','
         << format_double(grid.density[i].value) << ','
         << format_double(grid.density[i].std_error) << '\n';
    manifest.schema("pd_density.csv", "lambda,density,std_error");
  }

  std::ofstream evt(dir / "empirical_vs_tree.csv");
  evt << "chi_center,chi_width,finite,tree,tree_std_error\n";
  const double width = cfg.chi_width;
  json evt_summary = json::array();
  for (const double center : cfg.chi_centers) {
    auto chi = [center, width](double x) {
      const double t = (x - center) / width;
      return std::exp(-0.5 * t * t);
    };
    const EmpiricalVsTree row = empirical_vs_tree(spec, chi, grid);
    evt << format_double(center) << ',' << format_double(width) << ','
        << format_double(row.finite) << ',' << format_double(row.tree) << ','
        << format_double(row.tree_std_error) << '\n';
    evt_summary.push_back({{"center", center},
                           {"finite", row.finite},
                           {"tree", row.tree},
                           {"se", row.tree_std_error}});
    if (cfg.assert_evt) {
      const double bound = std::max(cfg.evt_abs_bound,
                                    cfg.evt_se_multiplier * row.tree_std_error);
      if (std::abs(row.finite - row.tree) > bound) {
        result.ok = false;
        result.message += "empirical-vs-tree gap at center " +
                          format_double(center) + " above bound; ";
      }
    }
  }
  manifest.schema("empirical_vs_tree.csv",
                  "chi_center,chi_width,finite,tree,tree_std_error");
  manifest.summary()["empirical_vs_tree"] = evt_summary;
  manifest.timing("empirical_vs_tree");

  // Phi histograms at the requested path lengths.
  ZetaPolicy policy(g, es, w, 1e-10);
  const ZetaField& zf = policy.solve(cplx(cfg.phi_lambda, cfg.eta0));
  for (const int k : cfg.phi_ks) {
    const PhiHistogram h =
        phi_histogram(g, es, zf, k, [](double) { return 1.0; },
                      cfg.path_budget);
    std::ofstream hist(dir / ("phi_hist_k" + std::to_string(k) + ".csv"));
    hist << "value,weight\n";
    if (!h.raw.empty()) {
      const auto [lo_it, hi_it] =
          std::minmax_element(h.raw.begin(), h.raw.end());
      const double lo = *lo_it, hi = *hi_it;
      const int bins = 61;
      const double step = (hi - lo) / bins == 0.0 ? 1.0 : (hi - lo) / bins;
      std::vector<int> counts(bins + 1, 0);
      for (const double v : h.raw)
        ++counts[static_cast<int>((v - lo) / step)];
      for (int bin = 0; bin <= bins; ++bin)
        if (counts[bin] > 0)
          hist << format_double(lo + (bin + 0.5) * step) << ','
               << format_double(static_cast<double>(counts[bin]) /
                                h.raw.size())
               << '\n';
    }
    manifest.schema("phi_hist_k" + std::to_string(k) + ".csv", "value,weight");
  }
  manifest.timing("phi_histograms");

  manifest.summary()["assertions_ok"] = result.ok;
  manifest.timing("total");
  manifest.write(dir);
  if (result.ok) result.message = "bs-check complete";
  return result;
}

}  // namespace qergo

#endif  // QERGO_RUNNER_HPP
