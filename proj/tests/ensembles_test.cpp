#include "qergo/ensembles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "test_util.hpp"

using namespace qergo;

static EnsembleConfig regular_cfg(int n, int degree, std::uint64_t seed) {
  EnsembleConfig cfg;
  cfg.n = n;
  cfg.degree = degree;
  cfg.seed = seed;
  return cfg;
}

TEST(RandomRegular, FourVerticesDegreeThreeIsK4) {
  const Graph g = random_regular(regular_cfg(4, 3, 7));
  for (int u = 0; u < 4; ++u)
    for (int v = u + 1; v < 4; ++v) EXPECT_TRUE(g.has_edge(u, v));
}

TEST(RandomRegular, InvariantScanAtN100) {
  const Graph g = random_regular(regular_cfg(100, 3, 42));
  EXPECT_EQ(g.vertex_count(), 100);
  for (int x = 0; x < 100; ++x) EXPECT_EQ(g.degree(x), 3);
  // simplicity/connectivity enforced by construction; spot check reachability
  const auto dist = g.bfs_distances(0);
  EXPECT_EQ(*std::min_element(dist.begin(), dist.end()), 0);
  EXPECT_GE(*std::max_element(dist.begin(), dist.end()), 1);
}

TEST(RandomRegular, OddPairingRejected) {
  EXPECT_THROW(random_regular(regular_cfg(5, 3, 1)), Error);
}

TEST(RandomRegular, SeedDeterminism) {
  const Graph a = random_regular(regular_cfg(60, 4, 9));
  const Graph b = random_regular(regular_cfg(60, 4, 9));
  std::ostringstream sa, sb;
  a.emit(sa);
  b.emit(sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(SamplePotential, ZeroDisorderIsZero) {
  const Graph g = testutil::k4();
  const Potential w = testutil::uniform_potential(g, 0.0, 5);
  for (const double v : w.values) EXPECT_EQ(v, 0.0);
}

TEST(SamplePotential, BoundsAndLawOfLargeNumbers) {
  const Graph g = random_regular(regular_cfg(2500, 3, 11));
  EnsembleConfig cfg = regular_cfg(2500, 3, 11);
  cfg.epsilon = 0.5;
  const Potential w = sample_potential(g, cfg);
  double mean = 0.0;
  for (const double v : w.values) {
    EXPECT_LE(std::abs(v), 0.5);
    mean += v;
  }
  mean /= w.values.size();
  EXPECT_LE(std::abs(mean), 3.0 / std::sqrt(2500.0));
}

TEST(SamplePotential, DiscreteListDrawsFromScaledSupport) {
  const Graph g = random_regular(regular_cfg(60, 3, 13));
  EnsembleConfig cfg = regular_cfg(60, 3, 13);
  cfg.epsilon = 0.5;
  cfg.nu = BaseDistribution::kDiscreteList;
  cfg.support = {-2.0, 0.0, 1.0};
  const Potential w = sample_potential(g, cfg);
  EXPECT_DOUBLE_EQ(w.bound, 1.0);  // epsilon * max |support|
  for (const double v : w.values)
    EXPECT_TRUE(v == -1.0 || v == 0.0 || v == 0.5) << v;
}

TEST(SamplePotential, SeedDeterminism) {
  const Graph g = random_regular(regular_cfg(50, 3, 3));
  EnsembleConfig cfg = regular_cfg(50, 3, 3);
  cfg.epsilon = 1.0;
  cfg.nu = BaseDistribution::kBernoulli;
  const Potential a = sample_potential(g, cfg);
  const Potential b = sample_potential(g, cfg);
  EXPECT_EQ(a.values, b.values);
  for (const double v : a.values) EXPECT_EQ(std::abs(v), 1.0);
}

TEST(ExpanderGap, ClosedFormSpectra) {
  // K4: spec(P) = {1, -1/3, -1/3, -1/3}; Petersen: {1, 1/3 x5, -2/3 x4};
  // K33 is bipartite, so -1 is in the spectrum.
  EXPECT_NEAR(expander_gap(testutil::k4()), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(expander_gap(testutil::petersen()), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(expander_gap(testutil::k33()), 0.0, 1e-12);
}

TEST(ExpanderGap, RelabelInvariance) {
  const Graph g = random_regular(regular_cfg(40, 3, 17));
  const double beta = expander_gap(g);
  SplitMix64 rng(123);
  std::vector<int> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, rng);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < 40; ++u)
    for (const int v : g.neighbors(u))
      if (u < v) edges.emplace_back(perm[u], perm[v]);
  const Graph h = Graph::from_edges(edges, 40);
  EXPECT_NEAR(expander_gap(h), beta, 1e-12);
}

TEST(ExpanderGap, MedianOverSeedsExceedsThreshold) {
  std::vector<double> gaps;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    gaps.push_back(expander_gap(random_regular(regular_cfg(500, 3, seed))));
  std::sort(gaps.begin(), gaps.end());
  const double median = 0.5 * (gaps[9] + gaps[10]);
  EXPECT_GT(median, 0.05);
}

TEST(BstProfile, ClosedFormExamples) {
  const auto k4 = bst_profile(testutil::k4(), 1);
  EXPECT_DOUBLE_EQ(k4[0], 1.0);

  const auto pet = bst_profile(testutil::petersen(), 2);
  EXPECT_DOUBLE_EQ(pet[0], 0.0);
  EXPECT_DOUBLE_EQ(pet[1], 1.0);

  const auto tree = bst_profile(testutil::truncated_tree(5), 2);
  EXPECT_LT(tree[0], 1.0);
  EXPECT_LT(tree[1], 1.0);
}

TEST(Pipeline, GraphPlusPotentialBitReproducible) {
  EnsembleConfig cfg = regular_cfg(80, 3, 2024);
  cfg.epsilon = 0.3;
  const Graph g1 = random_regular(cfg);
  const Potential w1 = sample_potential(g1, cfg);
  const Graph g2 = random_regular(cfg);
  const Potential w2 = sample_potential(g2, cfg);
  std::ostringstream s1, s2;
  g1.emit(s1);
  g2.emit(s2);
  EXPECT_EQ(s1.str(), s2.str());
  EXPECT_EQ(w1.values, w2.values);
}
