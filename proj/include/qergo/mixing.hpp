#ifndef QERGO_MIXING_HPP
#define QERGO_MIXING_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "qergo/cover_green.hpp"
#include "qergo/errors.hpp"
#include "qergo/graph.hpp"

namespace qergo {

// Reference transfer operator on edge functions, S f(e) = (1/q(o_e))
// sum_{e' -> e} f(e') with q(x) = d(x) - 1. Both S and its adjoint in
// l^2(B, U) are stochastic.
inline std::vector<cplx> reference_transfer(const Graph& g,
                                            const OrientedEdgeSet& es,
                                            std::span<const cplx> f,
                                            bool adjoint = false) {
  const int b = es.edge_count();
  std::vector<cplx> out(b, cplx(0.0));
  for (int e = 0; e < b; ++e) {
    const int x0 = es.origin[e];
    const int x1 = es.terminus[e];
    cplx acc = 0.0;
    if (!adjoint) {
      // predecessors (x_{-1}, x0) with x_{-1} != x1
      const int base = es.vertex_offset[x0];
      for (int i = 0; i < g.degree(x0); ++i) {
        const int eo = base + i;  // (x0 -> x_{-1})
        if (es.terminus[eo] == x1) continue;
        acc += f[es.reversal[eo]];
      }
      out[e] = acc / static_cast<double>(g.degree(x0) - 1);
    } else {
      // (S* f)(x0,x1) = sum_{x2 != x0} f(x1,x2)/q(x1)
      const int base = es.vertex_offset[x1];
      for (int i = 0; i < g.degree(x1); ++i) {
        const int en = base + i;  // (x1 -> x2)
        if (es.terminus[en] == x0) continue;
        acc += f[en] / static_cast<double>(g.degree(x1) - 1);
      }
      out[e] = acc;
    }
  }
  return out;
}

// Orthogonal projector in l^2(B, U) onto functions of the terminus:
// (P_{F,U} K)(e) = (1/d(t_e)) sum_{e' : t_{e'} = t_e} K(e').
inline std::vector<cplx> pfu_apply(const Graph& g, const OrientedEdgeSet& es,
                                   std::span<const cplx> f) {
  const int n = g.vertex_count();
  std::vector<cplx> by_terminus(n, cplx(0.0));
  for (int e = 0; e < es.edge_count(); ++e) by_terminus[es.terminus[e]] += f[e];
  std::vector<cplx> out(es.edge_count());
  for (int e = 0; e < es.edge_count(); ++e)
    out[e] = by_terminus[es.terminus[e]] /
             static_cast<double>(g.degree(es.terminus[e]));
  return out;
}

// Projector onto constants in l^2(B, U).
inline std::vector<cplx> p1u_apply(const OrientedEdgeSet& es,
                                   std::span<const cplx> f) {
  cplx mean = 0.0;
  for (const cplx v : f) mean += v;
  mean /= static_cast<double>(es.edge_count());
  return std::vector<cplx>(es.edge_count(), mean);
}

// Q = S* S and Q_2 = (S^2)* S^2 against the uniform structure.
inline std::vector<cplx> q_apply(const Graph& g, const OrientedEdgeSet& es,
                                 std::span<const cplx> f, int power = 1) {
  std::vector<cplx> v(f.begin(), f.end());
  for (int i = 0; i < power; ++i) v = reference_transfer(g, es, v, false);
  for (int i = 0; i < power; ++i) v = reference_transfer(g, es, v, true);
  return v;
}

// Matrix element of Q^gamma = S_gamma^* S_gamma in l^2(nu_1):
// Q^gamma(e, e') = sum_{e''} nu(e'') S(e'', e) S(e'', e') / nu(e),
// nonzero only when [e, e'] share their terminus.
inline double q_gamma_entry(const Graph& g, const OrientedEdgeSet& es,
                            const ZetaField& zf, std::span<const double> nu1,
                            int e, int ep) {
  if (es.terminus[e] != es.terminus[ep]) return 0.0;
  const int v = es.terminus[e];
  double acc = 0.0;
  const int base = es.vertex_offset[v];
  for (int i = 0; i < g.degree(v); ++i) {
    const int succ = base + i;  // (v -> x2), candidate common successor
    const int x2 = es.terminus[succ];
    if (x2 == es.origin[e] || x2 == es.origin[ep]) continue;
    // S(e'', e) with e'' = succ: xi at reversal of e'', |Im zeta| at iota(e).
    const double s_e = zf.xi[es.reversal[succ]] *
                       std::abs(zf.zeta[es.reversal[e]].imag());
    const double s_ep = zf.xi[es.reversal[succ]] *
                        std::abs(zf.zeta[es.reversal[ep]].imag());
    acc += nu1[succ] * s_e * s_ep;
  }
  return acc / nu1[e];
}

// Bad edges (nu_1 peaks) and bad pairs (small transition probabilities) at
// threshold M: e is bad when nu_1(e) > M/N, a pair [e, e'] with common
// terminus is bad when nu_1(e) Q^gamma(e,e') < 1/(M N).
struct BadSets {
  std::vector<int> edges;
  std::vector<std::pair<int, int>> pairs;
};

inline BadSets bad_sets(const Graph& g, const OrientedEdgeSet& es,
                        const ZetaField& zf, std::span<const double> nu1,
                        double M) {
  BadSets out;
  const double n = g.vertex_count();
  for (int e = 0; e < es.edge_count(); ++e)
    if (nu1[e] > M / n) out.edges.push_back(e);

  for (int v = 0; v < g.vertex_count(); ++v) {
    std::vector<int> in_edges;
    const int base = es.vertex_offset[v];
    for (int i = 0; i < g.degree(v); ++i)
      in_edges.push_back(es.reversal[base + i]);
    for (const int e : in_edges)
      for (const int ep : in_edges) {
        const double q = q_gamma_entry(g, es, zf, nu1, e, ep);
        if (q == 0.0) continue;
        if (nu1[e] * q < 1.0 / (M * n)) out.pairs.emplace_back(e, ep);
      }
  }
  return out;
}

// Phase products u_{x0}(x1) u_{x1}(x0) per oriented edge; unimodular by
// construction.
inline std::vector<cplx> phase_products(const OrientedEdgeSet& es,
                                        const ZetaField& zf) {
  std::vector<cplx> out(es.edge_count());
  for (int e = 0; e < es.edge_count(); ++e)
    out[e] = zf.u[e] * zf.u[es.reversal[e]];
  return out;
}

}  // namespace qergo

#endif  // QERGO_MIXING_HPP
