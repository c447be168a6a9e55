#ifndef QERGO_ENSEMBLES_HPP
#define QERGO_ENSEMBLES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qergo/errors.hpp"
#include "qergo/graph.hpp"
#include "qergo/rng.hpp"

namespace qergo {

// Vertex potential W with |W(x)| <= bound.
struct Potential {
  std::vector<double> values;
  double bound = 0.0;

  static Potential zero(int n) { return {std::vector<double>(n, 0.0), 0.0}; }
};

enum class BaseDistribution { kUniform, kBernoulli, kDiscreteList };

inline std::string name(BaseDistribution d) {
  switch (d) {
    case BaseDistribution::kUniform: return "uniform";
    case BaseDistribution::kBernoulli: return "bernoulli";
    case BaseDistribution::kDiscreteList: return "discrete-list";
  }
  return "?";
}

struct EnsembleConfig {
  int n = 0;
  int degree = 3;  // q + 1
  double epsilon = 0.0;
  BaseDistribution nu = BaseDistribution::kUniform;
  std::vector<double> support;  // for kDiscreteList
  std::uint64_t seed = 0;

  // sup norm of the base distribution, so that A = epsilon * nu_bound().
  double nu_bound() const {
    switch (nu) {
      case BaseDistribution::kUniform:
      case BaseDistribution::kBernoulli:
        return 1.0;
      case BaseDistribution::kDiscreteList: {
        double b = 0.0;
        for (const double v : support) b = std::max(b, std::abs(v));
        return b;
      }
    }
    return 0.0;
  }
};

constexpr int kDefaultRejectionBudget = 1000;

// Pairing (configuration) model with full-restart rejection of self-loops,
// multi-edges and disconnected outcomes. Uniform over simple connected
// d-regular graphs up to the usual configuration-model weighting.
inline Graph random_regular(const EnsembleConfig& cfg,
                            int rejection_budget = kDefaultRejectionBudget) {
  const int n = cfg.n;
  const int d = cfg.degree;
  if (static_cast<std::int64_t>(n) * d % 2 != 0)
    throw Error("N*(q+1) must be even for a pairing to exist");
  if (n <= d) throw Error("need N > q+1");

  SplitMix64 rng = derive_stream(cfg.seed, "graph");
  std::vector<int> stubs(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n * d; ++i) stubs[i] = i / d;

  for (int attempt = 0; attempt < rejection_budget; ++attempt) {
    shuffle(stubs, rng);
    std::vector<std::pair<int, int>> edges;
    edges.reserve(stubs.size() / 2);
    bool clean = true;
    std::vector<std::vector<int>> seen(n);
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      const int u = stubs[i], v = stubs[i + 1];
      if (u == v) {
        clean = false;
        break;
      }
      auto& su = seen[std::min(u, v)];
      if (std::find(su.begin(), su.end(), std::max(u, v)) != su.end()) {
        clean = false;
        break;
      }
      su.push_back(std::max(u, v));
      edges.emplace_back(u, v);
    }
    if (!clean) continue;
    try {
      return Graph::from_edges(edges, n);
    } catch (const DisconnectedGraphError&) {
      continue;
    }
  }
  throw RejectionBudgetExceededError(
      "no simple connected pairing found in " +
      std::to_string(rejection_budget) + " restarts");
}

// Degree-bounded random graph: i.i.d. degrees uniform in [dmin, dmax]
// (parity fixed by one in-range bump), then the same pairing model with
// rejection as random_regular.
inline Graph random_degree_bounded(int n, int dmin, int dmax,
                                   std::uint64_t seed,
                                   int rejection_budget = 50000) {
  if (dmin < 3 || dmax < dmin) throw Error("need 3 <= dmin <= dmax");
  SplitMix64 rng = derive_stream(seed, "graph");
  for (int attempt = 0; attempt < rejection_budget; ++attempt) {
    std::vector<int> degrees(n);
    int total = 0;
    for (int x = 0; x < n; ++x) {
      degrees[x] =
          dmin + static_cast<int>(rng.below(static_cast<std::uint64_t>(
                     dmax - dmin + 1)));
      total += degrees[x];
    }
    if (total % 2 != 0) {
      for (int x = 0; x < n; ++x) {
        if (degrees[x] < dmax) {
          ++degrees[x];
          ++total;
          break;
        }
        if (degrees[x] > dmin) {
          --degrees[x];
          --total;
          break;
        }
      }
    }
    if (total % 2 != 0) continue;

    std::vector<int> stubs;
    stubs.reserve(total);
    for (int x = 0; x < n; ++x)
      for (int i = 0; i < degrees[x]; ++i) stubs.push_back(x);
    shuffle(stubs, rng);

    std::vector<std::pair<int, int>> edges;
    edges.reserve(stubs.size() / 2);
    bool clean = true;
    std::vector<std::vector<int>> seen(n);
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      const int u = stubs[i], v = stubs[i + 1];
      if (u == v) {
        clean = false;
        break;
      }
      auto& su = seen[std::min(u, v)];
      if (std::find(su.begin(), su.end(), std::max(u, v)) != su.end()) {
        clean = false;
        break;
      }
      su.push_back(std::max(u, v));
      edges.emplace_back(u, v);
    }
    if (!clean) continue;
    try {
      return Graph::from_edges(edges, n);
    } catch (const DisconnectedGraphError&) {
      continue;
    }
  }
  throw RejectionBudgetExceededError(
      "no simple connected degree-bounded pairing found in " +
      std::to_string(rejection_budget) + " restarts");
}

// i.i.d. potential draws from nu_epsilon, one per vertex, stream "potential".
inline Potential sample_potential(const Graph& g, const EnsembleConfig& cfg) {
  SplitMix64 rng = derive_stream(cfg.seed, "potential");
  const int n = g.vertex_count();
  Potential w;
  w.values.resize(n);
  w.bound = cfg.epsilon * cfg.nu_bound();
  for (int x = 0; x < n; ++x) {
    switch (cfg.nu) {
      case BaseDistribution::kUniform:
        w.values[x] = cfg.epsilon * (2.0 * rng.next_double() - 1.0);
        break;
      case BaseDistribution::kBernoulli:
        w.values[x] = cfg.epsilon * (rng.next_double() < 0.5 ? -1.0 : 1.0);
        break;
      case BaseDistribution::kDiscreteList: {
        if (cfg.support.empty()) throw Error("discrete-list support is empty");
        const auto i = rng.below(cfg.support.size());
        w.values[x] = cfg.epsilon * cfg.support[i];
        break;
      }
    }
  }
  return w;
}

// Spectral gap of the random-walk Laplacian P on l^2(V, d):
// beta = 1 - max{|mu| : mu in spec(P), mu != 1}. Nonpositive for bipartite
// graphs since -1 is then in the spectrum.
inline double expander_gap(const Graph& g) {
  const int n = g.vertex_count();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u)
    for (const int v : g.neighbors(u))
      s(u, v) = 1.0 / std::sqrt(static_cast<double>(g.degree(u)) * g.degree(v));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw EigensolveFailureError("normalized adjacency eigensolve failed");
  const auto& ev = solver.eigenvalues();  // ascending; top entry is 1
  double worst = std::abs(ev(0));
  for (int i = 1; i + 1 < n; ++i) worst = std::max(worst, std::abs(ev(i)));
  return 1.0 - worst;
}

// Entry r (1-based) is |{x : rho_G(x) < r}| / N.
inline std::vector<double> bst_profile(const Graph& g, int r_max) {
  if (r_max < 1) throw Error("r_max must be >= 1");
  const int n = g.vertex_count();
  std::vector<int> rho(n);
  for (int x = 0; x < n; ++x) rho[x] = injectivity_radius(g, x);
  std::vector<double> profile(r_max);
  for (int r = 1; r <= r_max; ++r) {
    int cnt = 0;
    for (const int v : rho) cnt += v < r ? 1 : 0;
    profile[r - 1] = static_cast<double>(cnt) / n;
  }
  return profile;
}

}  // namespace qergo

#endif  // QERGO_ENSEMBLES_HPP
