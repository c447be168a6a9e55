#ifndef QERGO_TESTS_TEST_UTIL_HPP
#define QERGO_TESTS_TEST_UTIL_HPP

#include <utility>
#include <vector>

#include "qergo/ensembles.hpp"
#include "qergo/graph.hpp"

namespace qergo::testutil {

inline Graph k4() {
  return Graph::from_edges({{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, 4);
}

inline Graph petersen() {
  return Graph::from_edges({{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                            {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5},
                            {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}},
                           10);
}

inline Graph k33() {
  return Graph::from_edges(
      {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}},
      6);
}

// Rooted 3-regular tree truncated at the given depth: the root has 3
// children, interior vertices have 2, leaves have degree 1 (min-degree check
// disabled).
inline Graph truncated_tree(int depth) {
  std::vector<std::pair<int, int>> edges;
  int next = 1;
  std::vector<int> frontier = {0};
  for (int level = 0; level < depth; ++level) {
    std::vector<int> fresh;
    for (const int v : frontier) {
      const int children = level == 0 ? 3 : 2;
      for (int c = 0; c < children; ++c) {
        edges.emplace_back(v, next);
        fresh.push_back(next++);
      }
    }
    frontier = std::move(fresh);
  }
  return Graph::from_edges(edges, next, /*require_min_degree=*/false);
}

inline Potential uniform_potential(const Graph& g, double eps,
                                   std::uint64_t seed) {
  EnsembleConfig cfg;
  cfg.n = g.vertex_count();
  cfg.epsilon = eps;
  cfg.nu = BaseDistribution::kUniform;
  cfg.seed = seed;
  return sample_potential(g, cfg);
}

}  // namespace qergo::testutil

#endif  // QERGO_TESTS_TEST_UTIL_HPP
