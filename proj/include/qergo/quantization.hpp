#ifndef QERGO_QUANTIZATION_HPP
#define QERGO_QUANTIZATION_HPP

#include <complex>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qergo/errors.hpp"
#include "qergo/graph.hpp"
#include "qergo/util.hpp"

namespace qergo {

using cplx = std::complex<double>;

// An element of H_k: a complex kernel on non-backtracking paths of length k
// (k = 0 means a plain vertex function). Stored densely over a PathTable when
// one is supplied, or as a generating rule evaluated on demand; both modes
// must produce identical matrix elements.
class Observable {
 public:
  using Rule = std::function<cplx(std::span<const int>)>;

  static Observable dense(std::shared_ptr<const PathTable> table,
                          std::vector<cplx> values, double sup_bound) {
    Observable obs;
    obs.k_ = table->k();
    obs.table_ = std::move(table);
    obs.values_ = std::move(values);
    obs.sup_bound_ = sup_bound;
    return obs;
  }

  static Observable rule(int k, Rule fn, double sup_bound) {
    Observable obs;
    obs.k_ = k;
    obs.rule_ = std::move(fn);
    obs.sup_bound_ = sup_bound;
    return obs;
  }

  static Observable constant(int k, cplx value) {
    return rule(k, [value](std::span<const int>) { return value; },
                std::abs(value));
  }

  int k() const { return k_; }
  double sup_bound() const { return sup_bound_; }
  bool is_dense() const { return table_ != nullptr; }

  cplx value(std::span<const int> path_vertices) const {
    if (table_ != nullptr) {
      const int i = table_->index_of(path_vertices);
      return i < 0 ? cplx(0.0) : values_[i];
    }
    return rule_(path_vertices);
  }

 private:
  int k_ = 0;
  std::shared_ptr<const PathTable> table_;
  std::vector<cplx> values_;
  Rule rule_;
  double sup_bound_ = 0.0;
};

// Lift of a vertex-pair kernel supported at distance <= R: one H_k observable
// per k = 0..R, assigning kernel(x_0, x_k) to every nb path of length k. The
// cover-distance indicator of the lift is automatic for such paths.
inline std::vector<Observable> lift_kernel(
    const std::function<cplx(int, int)>& kernel, int R, const Graph& g) {
  std::vector<Observable> family;
  family.reserve(static_cast<std::size_t>(R) + 1);
  for (int k = 0; k <= R; ++k) {
    family.push_back(Observable::rule(
        k,
        [kernel](std::span<const int> vs) {
          return kernel(vs.front(), vs.back());
        },
        1.0));
  }
  // The contract requires |kernel| <= 1; scan the pairs reachable by nb paths.
  for (int k = 0; k <= R; ++k) {
    bool bad = false;
    for_each_nb_path(g, k, [&](const NbPath& p) {
      if (std::abs(kernel(p.vertices.front(), p.vertices.back())) >
          1.0 + 1e-12)
        bad = true;
    });
    if (bad)
      throw SupBoundViolatedError("lifted kernel exceeds sup bound 1 at k = " +
                                  std::to_string(k));
  }
  return family;
}

// Observable interchange format: a header line "k count", then one row per
// path, "x_0 ... x_k re im", in any order. Parsing materializes the
// observable densely over B_k; paths absent from the file carry the value 0.
inline void save_observable(const Graph& g, const Observable& obs,
                            std::ostream& os,
                            std::int64_t budget = kDefaultPathBudget) {
  std::vector<std::string> rows;
  for_each_nb_path(
      g, obs.k(),
      [&](const NbPath& p) {
        const cplx v = obs.value(p.vertices);
        if (v == cplx(0.0)) return;
        std::ostringstream row;
        for (const int x : p.vertices) row << x << ' ';
        row << format_double(v.real()) << ' ' << format_double(v.imag());
        rows.push_back(row.str());
      },
      budget);
  os << obs.k() << ' ' << rows.size() << '\n';
  for (const auto& row : rows) os << row << '\n';
}

inline Observable load_observable(const Graph& g, std::istream& is,
                                  std::int64_t budget = kDefaultPathBudget) {
  int k = 0;
  std::int64_t count = 0;
  if (!(is >> k >> count) || k < 0 || count < 0)
    throw Error("observable header: expected \"k count\"");
  auto table = std::make_shared<PathTable>(g, k, budget);
  std::vector<cplx> values(table->size(), cplx(0.0));
  double sup = 0.0;
  std::vector<int> vertices(k + 1);
  for (std::int64_t r = 0; r < count; ++r) {
    for (int i = 0; i <= k; ++i)
      if (!(is >> vertices[i])) throw Error("observable row: truncated path");
    double re = 0.0, im = 0.0;
    if (!(is >> re >> im)) throw Error("observable row: truncated value");
    const int idx = table->index_of(vertices);
    if (idx < 0) throw Error("observable row: not a non-backtracking path");
    values[idx] = cplx(re, im);
    sup = std::max(sup, std::abs(values[idx]));
  }
  return Observable::dense(std::move(table), std::move(values), sup);
}

// <phi1, K_G phi2> = sum_{(x_0..x_k) in B_k} conj(phi1(x_0)) K phi2(x_k).
template <typename Vec1, typename Vec2>
cplx kg_matrix_element(const Graph& g, const Observable& obs, const Vec1& phi1,
                       const Vec2& phi2,
                       std::int64_t budget = kDefaultPathBudget) {
  cplx acc = 0.0;
  for_each_nb_path(
      g, obs.k(),
      [&](const NbPath& p) {
        const cplx v = obs.value(p.vertices);
        if (v == cplx(0.0)) return;
        acc += std::conj(cplx(phi1[p.vertices.front()])) * v *
               cplx(phi2[p.vertices.back()]);
      },
      budget);
  return acc;
}

// <f1, K_B f2> = sum over B_k of conj(f1(x_0,x_1)) K f2(x_{k-1},x_k).
// Edge functions are indexed by oriented-edge id.
template <typename Vec1, typename Vec2>
cplx kb_matrix_element(const Graph& g, const OrientedEdgeSet& es,
                       const Observable& obs, const Vec1& f1, const Vec2& f2,
                       std::int64_t budget = kDefaultPathBudget) {
  if (obs.k() < 1)
    throw KZeroNotEdgeBasedError(
        "K_B requires k >= 1; use the K_G form for vertex observables");
  cplx acc = 0.0;
  for_each_nb_path(
      g, obs.k(),
      [&](const NbPath& p) {
        const cplx v = obs.value(p.vertices);
        if (v == cplx(0.0)) return;
        const auto& vs = p.vertices;
        const int e_first = es.index_of(g, vs[0], vs[1]);
        const int e_last =
            es.index_of(g, vs[vs.size() - 2], vs[vs.size() - 1]);
        acc += std::conj(cplx(f1[e_first])) * v * cplx(f2[e_last]);
      },
      budget);
  return acc;
}

}  // namespace qergo

#endif  // QERGO_QUANTIZATION_HPP
