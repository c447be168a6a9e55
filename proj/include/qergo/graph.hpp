#ifndef QERGO_GRAPH_HPP
#define QERGO_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qergo/errors.hpp"

namespace qergo {

// Immutable simple connected graph with every degree in [3, D]. Neighbor
// lists are sorted ascending so that all iteration orders are deterministic.
class Graph {
 public:
  Graph() = default;

  // `require_min_degree` is the standing assumption d(x) >= 3; diagnostics on
  // truncated trees may switch it off (simplicity and connectivity are always
  // enforced).
  static Graph from_edges(const std::vector<std::pair<int, int>>& edges, int n,
                          bool require_min_degree = true);

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(neighbors_.size()) / 2; }

  int degree(int x) const { return offsets_[x + 1] - offsets_[x]; }

  std::span<const int> neighbors(int x) const {
    return {neighbors_.data() + offsets_[x],
            static_cast<std::size_t>(degree(x))};
  }

  int min_degree() const;
  int max_degree() const;

  bool has_edge(int u, int v) const {
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  // Position of v inside u's sorted neighbor list; -1 when not adjacent.
  int neighbor_slot(int u, int v) const {
    const auto nb = neighbors(u);
    const auto it = std::lower_bound(nb.begin(), nb.end(), v);
    if (it == nb.end() || *it != v) return -1;
    return static_cast<int>(it - nb.begin());
  }

  // Offset of the first oriented edge with origin x (CSR layout shared with
  // OrientedEdgeSet).
  int edge_offset(int x) const { return offsets_[x]; }

  std::vector<int> bfs_distances(int source) const;

  // Text format: first line "N M", then M lines "u v" (0-based).
  void emit(std::ostream& os) const;
  static Graph parse(std::istream& is);

 private:
  int n_ = 0;
  std::vector<int> offsets_;    // n_+1 entries
  std::vector<int> neighbors_;  // sorted per vertex
};

// Oriented edges of a Graph. Edge e has origin o_e and terminus t_e; the
// reversal involution iota swaps them. Edges are indexed in lexicographic
// (origin, terminus) order, which coincides with the CSR layout of Graph.
struct OrientedEdgeSet {
  std::vector<int> origin;
  std::vector<int> terminus;
  std::vector<int> reversal;
  std::vector<int> vertex_offset;  // first edge with given origin

  int edge_count() const { return static_cast<int>(origin.size()); }

  int index_of(const Graph& g, int u, int v) const {
    const int slot = g.neighbor_slot(u, v);
    return slot < 0 ? -1 : vertex_offset[u] + slot;
  }
};

// A non-backtracking path (x_0, ..., x_k); k = 0 is a bare vertex.
struct NbPath {
  std::vector<int> vertices;
  int length() const { return static_cast<int>(vertices.size()) - 1; }
};

constexpr std::int64_t kDefaultPathBudget = 100000000;  // 10^8

inline Graph Graph::from_edges(const std::vector<std::pair<int, int>>& edges,
                               int n, bool require_min_degree) {
  if (n <= 0) throw Error("vertex count must be positive");
  if (edges.empty()) throw Error("edge list is empty");

  std::vector<std::vector<int>> adj(n);
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw Error("edge endpoint out of range");
    if (u == v) throw SelfLoopError("self-loop at vertex " + std::to_string(u));
    adj[u].push_back(v);
    adj[v].push_back(u);
  }

  Graph g;
  g.n_ = n;
  g.offsets_.assign(n + 1, 0);
  for (int x = 0; x < n; ++x) {
    auto& nb = adj[x];
    std::sort(nb.begin(), nb.end());
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
      throw MultiEdgeError("duplicate edge at vertex " + std::to_string(x));
    const int d = static_cast<int>(nb.size());
    if (require_min_degree && d < 3)
      throw DegreeOutOfRangeError("vertex " + std::to_string(x) +
                                  " has degree " + std::to_string(d) +
                                  " < 3");
    g.offsets_[x + 1] = g.offsets_[x] + d;
    g.neighbors_.insert(g.neighbors_.end(), nb.begin(), nb.end());
  }

  const auto dist = g.bfs_distances(0);
  for (int x = 0; x < n; ++x)
    if (dist[x] < 0)
      throw DisconnectedGraphError("vertex " + std::to_string(x) +
                                   " unreachable from vertex 0");
  return g;
}

inline int Graph::min_degree() const {
  int d = degree(0);
  for (int x = 1; x < n_; ++x) d = std::min(d, degree(x));
  return d;
}

inline int Graph::max_degree() const {
  int d = degree(0);
  for (int x = 1; x < n_; ++x) d = std::max(d, degree(x));
  return d;
}

inline std::vector<int> Graph::bfs_distances(int source) const {
  std::vector<int> dist(n_, -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const int x = q.front();
    q.pop();
    for (const int y : neighbors(x)) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
    }
  }
  return dist;
}

inline void Graph::emit(std::ostream& os) const {
  os << n_ << ' ' << edge_count() << '\n';
  for (int u = 0; u < n_; ++u)
    for (const int v : neighbors(u))
      if (u < v) os << u << ' ' << v << '\n';
}

inline Graph Graph::parse(std::istream& is) {
  int n = 0, m = 0;
  if (!(is >> n >> m)) throw Error("graph header: expected \"N M\"");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    int u = 0, v = 0;
    if (!(is >> u >> v)) throw Error("graph body: truncated edge list");
    edges.emplace_back(u, v);
  }
  return from_edges(edges, n);
}

inline OrientedEdgeSet oriented_edges(const Graph& g) {
  const int n = g.vertex_count();
  OrientedEdgeSet es;
  es.vertex_offset.assign(n, 0);
  const int b = 2 * g.edge_count();
  es.origin.reserve(b);
  es.terminus.reserve(b);
  for (int u = 0; u < n; ++u) {
    es.vertex_offset[u] = static_cast<int>(es.origin.size());
    for (const int v : g.neighbors(u)) {
      es.origin.push_back(u);
      es.terminus.push_back(v);
    }
  }
  es.reversal.resize(b);
  for (int e = 0; e < b; ++e)
    es.reversal[e] = es.index_of(g, es.terminus[e], es.origin[e]);
  return es;
}

// Oriented edges e' with o_{e'} = t_e and t_{e'} != o_e, ascending.
inline std::vector<int> nb_successors(const Graph& g, const OrientedEdgeSet& es,
                                      int e) {
  std::vector<int> out;
  const int v = es.terminus[e];
  out.reserve(static_cast<std::size_t>(g.degree(v)) - 1);
  const int base = es.vertex_offset[v];
  const auto nb = g.neighbors(v);
  for (int i = 0; i < static_cast<int>(nb.size()); ++i)
    if (nb[i] != es.origin[e]) out.push_back(base + i);
  return out;
}

// Streams every path of B_k exactly once, in lexicographic order of vertex
// sequences. Throws PathBudgetExceededError once more than `budget` paths
// would be produced.
inline void for_each_nb_path(const Graph& g, int k,
                             const std::function<void(const NbPath&)>& visit,
                             std::int64_t budget = kDefaultPathBudget) {
  if (k < 0) throw Error("path length must be nonnegative");
  const int n = g.vertex_count();
  std::int64_t count = 0;
  NbPath path;
  path.vertices.reserve(static_cast<std::size_t>(k) + 1);

  auto emit = [&]() {
    if (++count > budget)
      throw PathBudgetExceededError("non-backtracking path budget of " +
                                    std::to_string(budget) + " exceeded");
    visit(path);
  };

  std::function<void(int)> extend = [&](int remaining) {
    if (remaining == 0) {
      emit();
      return;
    }
    const auto& vs = path.vertices;
    const int here = vs.back();
    const int banned = vs.size() >= 2 ? vs[vs.size() - 2] : -1;
    for (const int next : g.neighbors(here)) {
      if (next == banned) continue;
      path.vertices.push_back(next);
      extend(remaining - 1);
      path.vertices.pop_back();
    }
  };

  for (int x = 0; x < n; ++x) {
    path.vertices.assign(1, x);
    extend(k);
  }
}

inline std::int64_t count_nb_paths(const Graph& g, int k,
                                   std::int64_t budget = kDefaultPathBudget) {
  std::int64_t count = 0;
  for_each_nb_path(g, k, [&](const NbPath&) { ++count; }, budget);
  return count;
}

// Materialized B_k with O(1) path-to-index lookup; used to store dense path
// functions and to apply transfer operators.
class PathTable {
 public:
  PathTable() = default;

  PathTable(const Graph& g, int k, std::int64_t budget = kDefaultPathBudget)
      : k_(k) {
    for_each_nb_path(
        g, k,
        [&](const NbPath& p) {
          index_.emplace(pack(p.vertices), static_cast<int>(paths_.size()));
          paths_.push_back(p);
        },
        budget);
  }

  int k() const { return k_; }
  int size() const { return static_cast<int>(paths_.size()); }
  const NbPath& path(int i) const { return paths_[i]; }
  const std::vector<NbPath>& paths() const { return paths_; }

  int index_of(std::span<const int> vertices) const {
    const auto it = index_.find(pack(vertices));
    return it == index_.end() ? -1 : it->second;
  }

 private:
  static std::string pack(std::span<const int> vs) {
    std::string key(vs.size() * sizeof(int), '\0');
    std::memcpy(key.data(), vs.data(), key.size());
    return key;
  }

  int k_ = 0;
  std::vector<NbPath> paths_;
  std::unordered_map<std::string, int> index_;
};

// Largest r such that the subgraph induced on the closed ball B(x, r) is
// acyclic. The induced ball is connected, so it is a tree iff its edge count
// equals its vertex count minus one.
inline int injectivity_radius(const Graph& g, int x) {
  const auto dist = g.bfs_distances(x);
  const int ecc = *std::max_element(dist.begin(), dist.end());
  std::vector<std::int64_t> vertices_at(ecc + 1, 0);
  for (const int d : dist) ++vertices_at[d];
  // Edges whose deeper endpoint sits at distance d.
  std::vector<std::int64_t> edges_at(ecc + 1, 0);
  for (int u = 0; u < g.vertex_count(); ++u)
    for (const int v : g.neighbors(u))
      if (u < v) ++edges_at[std::max(dist[u], dist[v])];

  std::int64_t nv = 0, ne = 0;
  int rho = 0;
  for (int r = 0; r <= ecc; ++r) {
    nv += vertices_at[r];
    ne += edges_at[r];
    if (ne == nv - 1)
      rho = r;
    else
      break;
  }
  return rho;
}

}  // namespace qergo

#endif  // QERGO_GRAPH_HPP
