#include "qergo/graph.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <set>
#include <sstream>

#include "test_util.hpp"

using namespace qergo;

TEST(BuildGraph, K4HasUniformDegreeThree) {
  const Graph g = testutil::k4();
  EXPECT_EQ(g.vertex_count(), 4);
  EXPECT_EQ(g.edge_count(), 6);
  for (int x = 0; x < 4; ++x) EXPECT_EQ(g.degree(x), 3);
}

TEST(BuildGraph, PetersenDegreeScan) {
  const Graph g = testutil::petersen();
  EXPECT_EQ(g.vertex_count(), 10);
  EXPECT_EQ(g.edge_count(), 15);
  for (int x = 0; x < 10; ++x) EXPECT_EQ(g.degree(x), 3);
}

TEST(BuildGraph, RejectsLowDegree) {
  EXPECT_THROW(Graph::from_edges({{0, 1}, {1, 2}, {2, 0}}, 3),
               DegreeOutOfRangeError);
}

TEST(BuildGraph, RejectsSelfLoopMultiEdgeDisconnected) {
  EXPECT_THROW(Graph::from_edges({{0, 0}, {0, 1}}, 2), SelfLoopError);
  EXPECT_THROW(
      Graph::from_edges({{0, 1}, {0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}},
                        4),
      MultiEdgeError);
  // two disjoint K4 blocks
  std::vector<std::pair<int, int>> edges;
  for (int base : {0, 4})
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) edges.emplace_back(base + i, base + j);
  EXPECT_THROW(Graph::from_edges(edges, 8), DisconnectedGraphError);
}

TEST(GraphText, EmitParseRoundTripIsBitExact) {
  const Graph g = testutil::petersen();
  std::ostringstream first;
  g.emit(first);
  std::istringstream in(first.str());
  const Graph parsed = Graph::parse(in);
  std::ostringstream second;
  parsed.emit(second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(OrientedEdges, CountsAndInvolution) {
  for (const Graph& g : {testutil::k4(), testutil::petersen()}) {
    const OrientedEdgeSet es = oriented_edges(g);
    EXPECT_EQ(es.edge_count(), 2 * g.edge_count());
    for (int e = 0; e < es.edge_count(); ++e) {
      EXPECT_NE(es.reversal[e], e);
      EXPECT_EQ(es.reversal[es.reversal[e]], e);
      EXPECT_EQ(es.origin[es.reversal[e]], es.terminus[e]);
      EXPECT_EQ(es.terminus[es.reversal[e]], es.origin[e]);
    }
  }
}

TEST(NbSuccessors, CountIsDegreeMinusOne) {
  const Graph g = testutil::petersen();
  const OrientedEdgeSet es = oriented_edges(g);
  for (int e = 0; e < es.edge_count(); ++e) {
    const auto succ = nb_successors(g, es, e);
    EXPECT_EQ(static_cast<int>(succ.size()), g.degree(es.terminus[e]) - 1);
    for (const int s : succ) {
      EXPECT_EQ(es.origin[s], es.terminus[e]);
      EXPECT_NE(es.terminus[s], es.origin[e]);
    }
  }
}

// Independent oracle: count non-backtracking triples by brute force over the
// adjacency structure.
static int brute_force_nb_paths_len2(const Graph& g) {
  int count = 0;
  for (int a = 0; a < g.vertex_count(); ++a)
    for (const int b : g.neighbors(a))
      for (const int c : g.neighbors(b))
        if (c != a) ++count;
  return count;
}

TEST(PathEnumeration, K4LengthTwoMatchesBruteForce) {
  const Graph g = testutil::k4();
  const int oracle = brute_force_nb_paths_len2(g);
  EXPECT_EQ(oracle, 24);  // 4 * 3 * 2
  EXPECT_EQ(count_nb_paths(g, 2), oracle);
}

TEST(PathEnumeration, TrivialLengths) {
  const Graph g = testutil::petersen();
  EXPECT_EQ(count_nb_paths(g, 0), g.vertex_count());
  EXPECT_EQ(count_nb_paths(g, 1), 2 * g.edge_count());
}

TEST(PathEnumeration, RegularCountFormulaAndUniqueness) {
  const Graph g = testutil::petersen();
  // |B_k| = N (q+1) q^{k-1} on (q+1)-regular graphs.
  for (int k = 1; k <= 4; ++k) {
    std::set<std::vector<int>> seen;
    for_each_nb_path(g, k, [&](const NbPath& p) {
      EXPECT_TRUE(seen.insert(p.vertices).second) << "duplicate path";
    });
    const double expected = 10.0 * 3.0 * std::pow(2.0, k - 1);
    EXPECT_EQ(static_cast<double>(seen.size()), expected);
  }
}

TEST(PathEnumeration, LexicographicOrderAndDeterminism) {
  const Graph g = testutil::k4();
  std::vector<std::vector<int>> first, second;
  for_each_nb_path(g, 2, [&](const NbPath& p) { first.push_back(p.vertices); });
  for_each_nb_path(g, 2,
                   [&](const NbPath& p) { second.push_back(p.vertices); });
  EXPECT_EQ(first, second);
  EXPECT_TRUE(std::is_sorted(first.begin(), first.end()));
}

TEST(PathEnumeration, BudgetGuard) {
  const Graph g = testutil::petersen();
  EXPECT_THROW(count_nb_paths(g, 3, 10), PathBudgetExceededError);
}

// Independent oracle: acyclicity of the induced ball via union-find.
static bool ball_is_tree(const Graph& g, int x, int r) {
  const auto dist = g.bfs_distances(x);
  std::vector<int> parent(g.vertex_count());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    return parent[v] == v ? v : parent[v] = find(parent[v]);
  };
  for (int u = 0; u < g.vertex_count(); ++u) {
    if (dist[u] > r) continue;
    for (const int v : g.neighbors(u)) {
      if (v < u || dist[v] > r) continue;
      const int ru = find(u), rv = find(v);
      if (ru == rv) return false;
      parent[ru] = rv;
    }
  }
  return true;
}

static int oracle_injectivity_radius(const Graph& g, int x) {
  int rho = 0;
  while (ball_is_tree(g, x, rho + 1)) ++rho;
  return rho;
}

TEST(InjectivityRadius, MatchesUnionFindOracle) {
  const Graph k4 = testutil::k4();
  for (int x = 0; x < 4; ++x) {
    EXPECT_EQ(injectivity_radius(k4, x), 0);
    EXPECT_EQ(injectivity_radius(k4, x), oracle_injectivity_radius(k4, x));
  }
  const Graph pet = testutil::petersen();
  for (int x = 0; x < 10; ++x) {
    EXPECT_EQ(injectivity_radius(pet, x), 1);
    EXPECT_EQ(injectivity_radius(pet, x), oracle_injectivity_radius(pet, x));
  }
}

TEST(InjectivityRadius, TruncatedTreeRoot) {
  const Graph tree = testutil::truncated_tree(5);
  EXPECT_EQ(injectivity_radius(tree, 0), 5);
}

TEST(PathTable, LookupInvertsEnumeration) {
  const Graph g = testutil::petersen();
  const PathTable table(g, 3);
  for (int i = 0; i < table.size(); ++i)
    EXPECT_EQ(table.index_of(table.path(i).vertices), i);
}
