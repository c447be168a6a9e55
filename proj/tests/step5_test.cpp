#include "qergo/step5.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace qergo;

namespace {

struct Instance {
  Graph g;
  OrientedEdgeSet es;
  Potential w;
  EigenSystem spec;
};

Instance make_instance(Graph graph, Potential w) {
  OrientedEdgeSet es = oriented_edges(graph);
  EigenSystem spec = eigensystem(graph, w);
  return {std::move(graph), std::move(es), std::move(w), std::move(spec)};
}

std::vector<cplx> random_fn(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<cplx> f(n);
  for (auto& v : f)
    v = cplx(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
  return f;
}

}  // namespace

TEST(PGamma, ConjugatedStochasticity) {
  const Graph graph = random_degree_bounded(30, 3, 6, 7);
  Instance in = make_instance(graph, testutil::uniform_potential(graph, 0.5, 7));
  const ZetaField zf = solve_zeta(in.g, in.es, in.w, cplx(0.3, 0.2));
  // P 1 = 1 transported through the N_gamma/d conjugation:
  // P_gamma (d/N_gamma) = d/N_gamma.
  std::vector<cplx> dn(in.g.vertex_count());
  for (int x = 0; x < in.g.vertex_count(); ++x)
    dn[x] = in.g.degree(x) / zf.n_gamma[x];
  const auto out = apply_p_gamma(in.g, zf, dn);
  for (int x = 0; x < in.g.vertex_count(); ++x)
    EXPECT_NEAR(std::abs(out[x] - dn[x]), 0.0, 1e-12);
}

TEST(STGamma, TEqualsOneIsIdentity) {
  Instance in = make_instance(testutil::petersen(), Potential::zero(10));
  const ZetaField zf = solve_zeta(in.g, in.es, in.w, cplx(0.5, 0.3));
  const auto j = random_fn(10, 3);
  const auto out = apply_s_t(in.g, zf, 1, j);
  for (int x = 0; x < 10; ++x) EXPECT_EQ(out[x], j[x]);
}

TEST(STGamma, TelescopingIdentity) {
  const Graph graph = random_degree_bounded(26, 3, 5, 15);
  Instance in =
      make_instance(graph, testutil::uniform_potential(graph, 0.7, 15));
  const ZetaField zf = solve_zeta(in.g, in.es, in.w, cplx(-0.4, 0.12));
  const auto j = random_fn(26, 8);
  for (const int T : {1, 2, 5}) {
    const auto stj = apply_s_t(in.g, zf, T, j);
    const auto pstj = apply_p_gamma(in.g, zf, stj);
    const auto sttj = apply_s_t_tilde(in.g, zf, T, j);
    for (int x = 0; x < 26; ++x)
      EXPECT_NEAR(std::abs(j[x] - (stj[x] - pstj[x]) - sttj[x]), 0.0, 1e-12);
  }
}

TEST(YGamma, AnnihilatesCenteredObservables) {
  const Graph graph = random_degree_bounded(22, 3, 6, 29);
  Instance in =
      make_instance(graph, testutil::uniform_potential(graph, 0.4, 29));
  const ZetaField zf = solve_zeta(in.g, in.es, in.w, cplx(0.2, 0.3));
  const auto c = random_fn(22, 5);

  // <N_gamma Y K>_U = <N_gamma K>_U
  const auto yk = apply_y(in.g, zf, c);
  cplx lhs = 0.0, rhs = 0.0;
  for (int x = 0; x < 22; ++x) {
    lhs += zf.n_gamma[x] * yk[x];
    rhs += zf.n_gamma[x] * c[x];
  }
  EXPECT_NEAR(std::abs(lhs - rhs) / 22.0, 0.0, 1e-13);

  // Y_gamma (C - <C>_gamma 1) = 0
  double navg = 0.0;
  cplx cavg = 0.0;
  for (int x = 0; x < 22; ++x) {
    navg += zf.n_gamma[x];
    cavg += zf.n_gamma[x] * c[x];
  }
  cavg /= navg;
  std::vector<cplx> centered(22);
  for (int x = 0; x < 22; ++x) centered[x] = c[x] - cavg;
  const auto y0 = apply_y(in.g, zf, centered);
  for (int x = 0; x < 22; ++x) EXPECT_NEAR(std::abs(y0[x]), 0.0, 1e-13);
}

TEST(TOperator, FlagsArtificialDegenerateEdges) {
  Instance in = make_instance(testutil::k4(), Potential::zero(4));
  ZetaField zf = solve_zeta(in.g, in.es, in.w, cplx(0.0, 1.0));
  // overwrite one reversal pair so |zeta(e) zeta(iota e)| = 1
  zf.zeta[0] = cplx(0.0, -2.0);
  zf.zeta[in.es.reversal[0]] = cplx(0.0, -0.5);
  const auto k1 = random_fn(in.es.edge_count(), 2);
  const auto res = apply_t(in.g, in.es, zf, k1);
  EXPECT_FALSE(res.clean());
  EXPECT_EQ(res.values[0], cplx(0.0));
  for (const int e : res.skipped_edges)
    EXPECT_TRUE(e == 0 || e == in.es.reversal[0]);
}

TEST(Step5Suite, ExactOnK4) {
  Instance in = make_instance(testutil::k4(), Potential::zero(4));
  ZetaPolicy policy(in.g, in.es, in.w, 1e-13);
  Step5SuiteOptions opts;
  opts.T = 3;
  opts.m_values = {2, 3};
  opts.eigen_samples = 4;
  opts.operand_samples = 2;
  const auto rep = step5_identity_suite(in.g, in.es, in.spec, policy, 0.1, opts);
  EXPECT_EQ(rep.degenerate_skips, 0);
  EXPECT_LE(rep.pasinitial, 1e-10);
  EXPECT_LE(rep.telescoping, 1e-12);
  EXPECT_LE(rep.passuperieur_t, 1e-10);
  EXPECT_LE(rep.passuperieur_t_tilde, 1e-10);
  EXPECT_LE(rep.passuperieur_higher, 1e-10);
  EXPECT_LE(rep.check_o1, 1e-10);
  EXPECT_LE(rep.check_o1_tilde, 1e-10);
  EXPECT_LE(rep.gammav, 1e-10);
}

TEST(Step5Suite, ExactOnRandomMixedDegreeInstance) {
  const Graph graph = random_degree_bounded(50, 3, 6, 83);
  Instance in =
      make_instance(graph, testutil::uniform_potential(graph, 0.8, 83));
  ZetaPolicy policy(in.g, in.es, in.w, 1e-12);
  Step5SuiteOptions opts;
  opts.T = 4;
  opts.m_values = {2};
  opts.eigen_samples = 3;
  opts.operand_samples = 2;
  opts.seed = 17;
  const auto rep = step5_identity_suite(in.g, in.es, in.spec, policy, 0.05,
                                        opts);
  EXPECT_LE(rep.max(), 1e-9);
}

TEST(Step5Suite, K4CheckO1WithUnitObservableIsZeroAverage) {
  // On K4 at gamma = i both <K>_gamma and <O_1 K>_gamma vanish for K = 1 on
  // B_1 (the neighbor Green values are purely real there).
  Instance in = make_instance(testutil::k4(), Potential::zero(4));
  const ZetaField zf = solve_zeta(in.g, in.es, in.w, cplx(0.0, 1.0));
  const PathTable table0(in.g, 0);
  const PathTable table1(in.g, 1);
  const std::vector<cplx> ones(in.es.edge_count(), 1.0);
  const cplx avg_k = wavg_pair(in.g, in.es, zf, table1, ones);
  EXPECT_NEAR(std::abs(avg_k), 0.0, 1e-12);
  const auto tk = apply_t(in.g, in.es, zf, ones);
  ASSERT_TRUE(tk.clean());
  const auto o1 = apply_o1_from_t(in.g, in.es, zf, tk.values);
  EXPECT_NEAR(std::abs(wavg_pair(in.g, in.es, zf, table0, o1)), 0.0, 1e-12);
}
