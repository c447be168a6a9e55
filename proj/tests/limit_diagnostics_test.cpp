#include "qergo/limit_diagnostics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace qergo;

namespace {

// Im < 0 root of q z^2 - gamma z + 1 = 0 (regular-tree cavity value).
cplx regular_tree_zeta(int q, cplx gamma) {
  const cplx disc = std::sqrt(gamma * gamma - 4.0 * static_cast<double>(q));
  const cplx a = (gamma + disc) / (2.0 * static_cast<double>(q));
  const cplx b = (gamma - disc) / (2.0 * static_cast<double>(q));
  return a.imag() < 0.0 ? a : b;
}

double regular_tree_im_green(int q, cplx gamma) {
  const cplx z = regular_tree_zeta(q, gamma);
  const cplx two_m = gamma - (q + 1.0) * z;
  return std::imag(-1.0 / two_m);
}

}  // namespace

TEST(KestenMcKay, ClosedFormValues) {
  EXPECT_NEAR(kesten_mckay_density(2, 0.0), std::sqrt(2.0) / (3.0 * M_PI),
              1e-10);
  EXPECT_EQ(kesten_mckay_density(2, 3.0), 0.0);
  for (const double lam : {0.3, 1.1, 2.6})
    EXPECT_DOUBLE_EQ(kesten_mckay_density(2, lam),
                     kesten_mckay_density(2, -lam));
}

TEST(KestenMcKay, MatchesTreeGreenBoundaryValue) {
  for (const double lam : {0.0, 0.8, -1.7, 2.4}) {
    const double density =
        regular_tree_im_green(2, cplx(lam, 1e-9)) / M_PI;
    EXPECT_NEAR(kesten_mckay_density(2, lam), density, 1e-6);
  }
}

TEST(KestenMcKay, CdfNormalizesToOne) {
  for (const int q : {2, 3, 5}) {
    EXPECT_NEAR(kesten_mckay_cdf(q, 2.0 * std::sqrt(q) + 0.1), 1.0, 1e-8);
    EXPECT_EQ(kesten_mckay_cdf(q, -2.0 * std::sqrt(q) - 0.1), 0.0);
    // symmetry of the law
    EXPECT_NEAR(kesten_mckay_cdf(q, 0.0), 0.5, 1e-8);
  }
}

TEST(GreenDiagonalAverage, K4AnchorAndRegularExactness) {
  const Graph k4 = testutil::k4();
  const OrientedEdgeSet es4 = oriented_edges(k4);
  const ZetaField zf4 = solve_zeta(k4, es4, Potential::zero(4), cplx(0.0, 1.0));
  EXPECT_NEAR(green_diagonal_average(zf4), 0.4, 1e-12);

  // On any 3-regular graph with W = 0 the cover is the same tree, so the
  // average matches the closed form exactly (up to solver tolerance).
  EnsembleConfig cfg;
  cfg.n = 200;
  cfg.degree = 3;
  cfg.seed = 77;
  const Graph g = random_regular(cfg);
  const OrientedEdgeSet es = oriented_edges(g);
  const cplx gamma(0.5, 0.1);
  const ZetaField zf = solve_zeta(g, es, Potential::zero(200), gamma);
  EXPECT_NEAR(green_diagonal_average(zf), regular_tree_im_green(2, gamma),
              1e-10);
  EXPECT_GT(green_diagonal_average(zf), 0.0);
}

TEST(PhiHistogram, NormalizationAndRegularCollapse) {
  EnsembleConfig cfg;
  cfg.n = 40;
  cfg.degree = 3;
  cfg.seed = 12;
  const Graph g = random_regular(cfg);
  const OrientedEdgeSet es = oriented_edges(g);
  const ZetaField zf = solve_zeta(g, es, Potential::zero(40), cplx(0.3, 0.2));

  const auto ident = phi_histogram(g, es, zf, 0, [](double t) { return t; });
  EXPECT_NEAR(ident.value, 1.0, 1e-12);

  // all diagonal N*Phi values equal 1 on a regular zero-potential instance
  const auto fofone =
      phi_histogram(g, es, zf, 0, [](double t) { return std::cos(t); });
  EXPECT_NEAR(fofone.value, std::cos(1.0), 1e-12);
  for (const double v : ident.raw) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(PhiHistogram, K4NeighborAbsoluteValueVanishes) {
  const Graph g = testutil::k4();
  const OrientedEdgeSet es = oriented_edges(g);
  const ZetaField zf = solve_zeta(g, es, Potential::zero(4), cplx(0.0, 1.0));
  const auto h =
      phi_histogram(g, es, zf, 1, [](double t) { return std::abs(t); });
  EXPECT_NEAR(h.value, 0.0, 1e-11);
}

TEST(PopulationDynamics, MatchesClosedFormAtZeroDisorder) {
  EnsembleConfig cfg;
  cfg.epsilon = 0.0;
  cfg.seed = 9;
  const PopulationDynamicsOracle oracle(2, cfg, 20000, 200);
  for (const double lam : {0.0, 1.0}) {
    const auto est = oracle.green_diagonal(lam, 0.05);
    EXPECT_NEAR(est.value, regular_tree_im_green(2, cplx(lam, 0.05)), 1e-3);
    EXPECT_LT(est.std_error, 1e-3);
  }
}

TEST(PopulationDynamics, CltScalingOfStandardError) {
  EnsembleConfig cfg;
  cfg.epsilon = 0.5;
  cfg.seed = 31;
  const PopulationDynamicsOracle oracle(2, cfg, 20000, 150);
  const auto half = oracle.green_diagonal(0.4, 0.1, 10000);
  const auto full = oracle.green_diagonal(0.4, 0.1, 20000);
  const double ratio = full.std_error / half.std_error;
  EXPECT_GE(ratio, 0.6);
  EXPECT_LE(ratio, 0.85);
}

TEST(EmpiricalVsTree, ChiOneIsExactOnBothSides) {
  EnsembleConfig cfg;
  cfg.n = 150;
  cfg.degree = 3;
  cfg.seed = 5;
  cfg.epsilon = 0.4;
  const Graph g = random_regular(cfg);
  const Potential w = sample_potential(g, cfg);
  const EigenSystem spec = eigensystem(g, w);

  const PopulationDynamicsOracle oracle(2, cfg, 5000, 120);
  const auto grid = oracle.density_grid(-3.5, 3.5, 0.05, 43, 2000);
  const auto row =
      empirical_vs_tree(spec, [](double) { return 1.0; }, grid);
  EXPECT_DOUBLE_EQ(row.finite, 1.0);
  EXPECT_DOUBLE_EQ(row.tree, 1.0);
}

TEST(EmpiricalVsTree, GaussianWindowAgreesAtModerateSize) {
  EnsembleConfig cfg;
  cfg.n = 600;
  cfg.degree = 3;
  cfg.seed = 44;
  cfg.epsilon = 0.0;
  const Graph g = random_regular(cfg);
  const EigenSystem spec = eigensystem(g, Potential::zero(600));

  auto chi = [](double x) { return std::exp(-x * x / (2.0 * 0.3 * 0.3)); };
  // zero disorder: compare against the Kesten-McKay quadrature oracle
  double km = 0.0;
  const int panels = 2000;
  const double lo = -2.9, hi = 2.9, h = (hi - lo) / panels;
  for (int i = 0; i <= panels; ++i) {
    const double x = lo + i * h;
    const double wgt = (i == 0 || i == panels) ? 0.5 : 1.0;
    km += wgt * h * chi(x) * kesten_mckay_density(2, x);
  }
  const EmpiricalMeasure emp = EmpiricalMeasure::of_eigenvalues(spec);
  EXPECT_NEAR(emp.integrate(chi), km, 0.02);
}
