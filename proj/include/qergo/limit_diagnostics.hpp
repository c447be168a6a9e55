#ifndef QERGO_LIMIT_DIAGNOSTICS_HPP
#define QERGO_LIMIT_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <vector>

#include "qergo/cover_green.hpp"
#include "qergo/ensembles.hpp"
#include "qergo/errors.hpp"
#include "qergo/graph.hpp"
#include "qergo/rng.hpp"
#include "qergo/spectral.hpp"

namespace qergo {

// Empirical law of eigenvalues (or any weighted sample).
struct EmpiricalMeasure {
  std::vector<double> points;
  std::vector<double> weights;  // nonnegative, sum to 1
  double smoothing_eta = 0.0;

  static EmpiricalMeasure of_eigenvalues(const EigenSystem& spec) {
    EmpiricalMeasure m;
    const int n = spec.size();
    m.points.resize(n);
    for (int j = 0; j < n; ++j) m.points[j] = spec.lambda(j);
    m.weights.assign(n, 1.0 / n);
    return m;
  }

  double integrate(const std::function<double(double)>& chi) const {
    bool uniform = true;
    for (const double w : weights)
      if (w != weights.front()) {
        uniform = false;
        break;
      }
    if (uniform) {
      // summing chi first keeps chi = 1 exactly normalized
      double acc = 0.0;
      for (const double p : points) acc += chi(p);
      return acc / static_cast<double>(points.size());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      acc += weights[i] * chi(points[i]);
    return acc;
  }
};

// Spectral density of the (q+1)-regular tree; vanishes outside
// [-2 sqrt(q), 2 sqrt(q)].
inline double kesten_mckay_density(int q, double lambda) {
  if (q < 2) throw Error("kesten_mckay_density needs q >= 2");
  const double edge2 = 4.0 * q;
  const double l2 = lambda * lambda;
  if (l2 >= edge2) return 0.0;
  const double d = q + 1.0;
  return d * std::sqrt(edge2 - l2) / (2.0 * M_PI * (d * d - l2));
}

// CDF of the Kesten-McKay law via the substitution lambda = 2 sqrt(q) sin t,
// which removes the square-root endpoints; Simpson then converges fast.
inline double kesten_mckay_cdf(int q, double lambda, int panels = 4000) {
  const double edge = 2.0 * std::sqrt(static_cast<double>(q));
  if (lambda <= -edge) return 0.0;
  if (lambda >= edge) return 1.0;
  const double t1 = std::asin(lambda / edge);
  const double t0 = -M_PI / 2.0;
  auto integrand = [&](double t) {
    const double x = edge * std::sin(t);
    return kesten_mckay_density(q, x) * edge * std::cos(t);
  };
  // composite Simpson
  const int n = panels % 2 == 0 ? panels : panels + 1;
  const double h = (t1 - t0) / n;
  double acc = integrand(t0) + integrand(t1);
  for (int i = 1; i < n; ++i)
    acc += integrand(t0 + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Kolmogorov-Smirnov distance between the empirical CDF of a sorted sample
// and a reference CDF.
inline double ks_distance(const std::vector<double>& sorted_sample,
                          const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted_sample.size());
  double ks = 0.0;
  for (std::size_t j = 0; j < sorted_sample.size(); ++j) {
    const double f = cdf(sorted_sample[j]);
    ks = std::max(ks, std::abs(f - (j + 1) / n));
    ks = std::max(ks, std::abs(f - j / n));
  }
  return ks;
}

// (1/N) sum_x Im g~(x,x) = mean of N_gamma.
inline double green_diagonal_average(const ZetaField& zf) {
  return std::accumulate(zf.n_gamma.begin(), zf.n_gamma.end(), 0.0) /
         static_cast<double>(zf.n_gamma.size());
}

// (1/N) sum_x sum_{cover distance k} F(N Phi(x~, y~)); also returns the raw
// multiset of N Phi values for plotting.
struct PhiHistogram {
  double value = 0.0;
  std::vector<double> raw;  // N * Phi per path
};

inline PhiHistogram phi_histogram(const Graph& g, const OrientedEdgeSet& es,
                                  const ZetaField& zf, int k,
                                  const std::function<double(double)>& F,
                                  std::int64_t budget = kDefaultPathBudget) {
  const double n = g.vertex_count();
  const double denom =
      std::accumulate(zf.n_gamma.begin(), zf.n_gamma.end(), 0.0);
  PhiHistogram out;
  double acc = 0.0;
  for_each_nb_path(
      g, k,
      [&](const NbPath& p) {
        const double nphi =
            n * tree_green(g, es, zf, p).imag() / denom;
        out.raw.push_back(nphi);
        acc += F(nphi);
      },
      budget);
  out.value = acc / n;
  return out;
}

// Population-dynamics estimator for tree expectations of the rooted Green
// function under i.i.d. disorder on the (q+1)-regular tree. The pool holds
// samples of the cavity value zeta (q children); the root estimate closes
// the recursion with q+1 children.
class PopulationDynamicsOracle {
 public:
  struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
  };

  PopulationDynamicsOracle(int q, const EnsembleConfig& cfg, int pool_size,
                           int burn_in_sweeps = 300,
                           std::int64_t sample_budget = 1000000000)
      : q_(q),
        cfg_(cfg),
        pool_size_(pool_size),
        burn_in_(burn_in_sweeps),
        budget_(sample_budget) {
    if (q_ < 1) throw Error("population dynamics needs q >= 1");
  }

  // E Im G(o,o; lambda + i eta) with a Monte-Carlo standard error.
  Estimate green_diagonal(double lambda, double eta,
                          int root_samples = 0) const {
    if (eta <= 0.0) throw RealAxisParameterError("needs eta > 0");
    if (root_samples <= 0) root_samples = pool_size_;
    const std::int64_t work =
        static_cast<std::int64_t>(burn_in_) * pool_size_ + root_samples;
    if (work > budget_)
      throw OracleBudgetExceededError(
          "population-dynamics sample budget exceeded");

    const cplx gamma(lambda, eta);
    SplitMix64 rng = derive_stream(
        cfg_.seed ^ hash_label("population-dynamics"),
        std::to_string(lambda) + ":" + std::to_string(eta));
    std::vector<cplx> pool(pool_size_, cplx(0.0, -1.0));

    for (int sweep = 0; sweep < burn_in_; ++sweep) {
      for (int i = 0; i < pool_size_; ++i) {
        cplx sum = 0.0;
        for (int c = 0; c < q_; ++c) sum += pool[rng.below(pool_size_)];
        pool[i] = 1.0 / (gamma - draw_potential(rng) - sum);
      }
    }

    double mean = 0.0, m2 = 0.0;
    for (int s = 0; s < root_samples; ++s) {
      cplx sum = 0.0;
      for (int c = 0; c < q_ + 1; ++c) sum += pool[rng.below(pool_size_)];
      const double im_g =
          std::imag(-1.0 / (gamma - draw_potential(rng) - sum));
      const double delta = im_g - mean;
      mean += delta / (s + 1);
      m2 += delta * (im_g - mean);
    }
    const double var = m2 / std::max(1, root_samples - 1);
    return {mean, std::sqrt(var / root_samples)};
  }

  // Estimated spectral density (1/pi) E Im G(o,o; . + i eta) on a uniform
  // grid covering the full spectrum; reusable across test functions.
  struct DensityGrid {
    std::vector<double> lambdas;
    std::vector<Estimate> density;  // value already divided by pi
    double step = 0.0;
    double mass = 0.0;  // Simpson integral of the density
  };

  DensityGrid density_grid(double lo, double hi, double eta,
                           int grid_points = 69, int root_samples = 0) const {
    if (grid_points < 3 || grid_points % 2 == 0)
      throw Error("density_grid wants an odd grid size >= 3");
    DensityGrid grid;
    const double h = (hi - lo) / (grid_points - 1);
    grid.step = h;
    for (int i = 0; i < grid_points; ++i) {
      const double lam = lo + i * h;
      Estimate e = green_diagonal(lam, eta, root_samples);
      e.value /= M_PI;
      e.std_error /= M_PI;
      grid.lambdas.push_back(lam);
      grid.density.push_back(e);
      grid.mass += simpson_weight(i, grid_points, h) * e.value;
    }
    return grid;
  }

  // Self-normalized quadrature of chi against the grid density: exact for
  // chi identically 1 by construction.
  static Estimate chi_expectation(const DensityGrid& grid,
                                  const std::function<double(double)>& chi) {
    const int n = static_cast<int>(grid.lambdas.size());
    const double h = grid.step;
    double value = 0.0, var = 0.0;
    for (int i = 0; i < n; ++i) {
      const double coeff = simpson_weight(i, n, h) * chi(grid.lambdas[i]);
      value += coeff * grid.density[i].value;
      var += coeff * coeff * grid.density[i].std_error *
             grid.density[i].std_error;
    }
    return {value / grid.mass, std::sqrt(var) / grid.mass};
  }

  static double simpson_weight(int i, int points, double h) {
    const double w = (i == 0 || i == points - 1) ? 1.0
                     : (i % 2 == 1)              ? 4.0
                                                 : 2.0;
    return w * h / 3.0;
  }

 private:
  double draw_potential(SplitMix64& rng) const {
    switch (cfg_.nu) {
      case BaseDistribution::kUniform:
        return cfg_.epsilon * (2.0 * rng.next_double() - 1.0);
      case BaseDistribution::kBernoulli:
        return cfg_.epsilon * (rng.next_double() < 0.5 ? -1.0 : 1.0);
      case BaseDistribution::kDiscreteList:
        return cfg_.epsilon * cfg_.support[rng.below(cfg_.support.size())];
    }
    return 0.0;
  }

  int q_;
  EnsembleConfig cfg_;
  int pool_size_;
  int burn_in_;
  std::int64_t budget_;
};

// Empirical average (1/N) sum_j chi(lambda_j) against the tree-side
// Monte-Carlo estimate of E <delta_o, chi(H) delta_o>.
struct EmpiricalVsTree {
  double finite = 0.0;
  double tree = 0.0;
  double tree_std_error = 0.0;
};

inline EmpiricalVsTree empirical_vs_tree(
    const EigenSystem& spec, const std::function<double(double)>& chi,
    const PopulationDynamicsOracle::DensityGrid& grid) {
  EmpiricalVsTree out;
  const EmpiricalMeasure emp = EmpiricalMeasure::of_eigenvalues(spec);
  out.finite = emp.integrate(chi);
  const auto est = PopulationDynamicsOracle::chi_expectation(grid, chi);
  out.tree = est.value;
  out.tree_std_error = est.std_error;
  return out;
}

}  // namespace qergo

#endif  // QERGO_LIMIT_DIAGNOSTICS_HPP
