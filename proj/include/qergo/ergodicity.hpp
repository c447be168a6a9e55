#ifndef QERGO_ERGODICITY_HPP
#define QERGO_ERGODICITY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qergo/cover_green.hpp"
#include "qergo/errors.hpp"
#include "qergo/graph.hpp"
#include "qergo/quantization.hpp"
#include "qergo/spectral.hpp"

namespace qergo {

// Quasi-eigenvectors of the weighted non-backtracking walk at
// gamma_j = lambda_j + i eta_0:
//   f(x0,x1)  = zeta_{x0}(x1)^{-1} psi(x1) - psi(x0),   f* = iota f,
// and g, g* with zeta replaced by conj(zeta).
struct QuasiEigenvectors {
  int j = 0;
  double lambda = 0.0;
  cplx gamma;
  std::vector<cplx> f, f_star, g, g_star;  // per oriented edge
};

inline QuasiEigenvectors make_quasi_eigenvectors(const Graph& graph,
                                                 const OrientedEdgeSet& es,
                                                 const ZetaField& zf,
                                                 const EigenSystem& spec,
                                                 int j) {
  const int b = es.edge_count();
  QuasiEigenvectors qv;
  qv.j = j;
  qv.lambda = spec.lambda(j);
  qv.gamma = zf.gamma;
  qv.f.resize(b);
  qv.f_star.resize(b);
  qv.g.resize(b);
  qv.g_star.resize(b);
  for (int e = 0; e < b; ++e) {
    const double po = spec.psi(j, es.origin[e]);
    const double pt = spec.psi(j, es.terminus[e]);
    const cplx ze = zf.zeta[e];
    const cplx zr = zf.zeta[es.reversal[e]];
    qv.f[e] = pt / ze - po;
    qv.f_star[e] = po / zr - pt;
    qv.g[e] = pt / std::conj(ze) - po;
    qv.g_star[e] = po / std::conj(zr) - pt;
  }
  (void)graph;
  return qv;
}

struct Interval {
  double lo = -1e300;
  double hi = 1e300;
  bool contains(double x) const { return x > lo && x < hi; }
};

inline std::vector<QuasiEigenvectors> build_quasi_eigenvectors(
    const Graph& graph, const OrientedEdgeSet& es, const EigenSystem& spec,
    ZetaPolicy& policy, double eta0, const Interval& interval) {
  if (!(eta0 > 0.0 && eta0 < 1.0)) throw Error("eta0 must lie in (0,1)");
  std::vector<QuasiEigenvectors> out;
  for (int j = 0; j < spec.size(); ++j) {
    if (!interval.contains(spec.lambda(j))) continue;
    const ZetaField& zf = policy.solve(cplx(spec.lambda(j), eta0));
    out.push_back(make_quasi_eigenvectors(graph, es, zf, spec, j));
  }
  return out;
}

// Sup-norm residuals of B (zeta f) = f - i eta0 tau_+ psi and of the
// adjoint equation for f*. Both vanish identically given an exact zeta field.
inline std::pair<double, double> newef_residual(const Graph& graph,
                                                const OrientedEdgeSet& es,
                                                const ZetaField& zf,
                                                const EigenSystem& spec,
                                                const QuasiEigenvectors& qv) {
  const int b = es.edge_count();
  const double eta0 = zf.eta();
  std::vector<cplx> zf_f(b), izf_fstar(b);
  for (int e = 0; e < b; ++e) zf_f[e] = zf.zeta[e] * qv.f[e];
  // iota zeta is the reversed field: the factor at e is zeta(iota e)
  for (int e = 0; e < b; ++e)
    izf_fstar[e] = zf.zeta[es.reversal[e]] * qv.f_star[e];

  double r1 = 0.0, r2 = 0.0;
  for (int e = 0; e < b; ++e) {
    // (B h)(x0,x1) = sum_{x2 != x0} h(x1,x2)
    cplx acc = 0.0;
    const int v = es.terminus[e];
    const int base = es.vertex_offset[v];
    for (int i = 0; i < graph.degree(v); ++i) {
      const int e2 = base + i;
      if (es.terminus[e2] == es.origin[e]) continue;
      acc += zf_f[e2];
    }
    r1 = std::max(r1, std::abs(acc - qv.f[e] +
                               cplx(0.0, eta0) * spec.psi(qv.j, v)));

    // (B* h)(x0,x1) = sum_{x_{-1} != x1} h(x_{-1},x0)
    cplx acc2 = 0.0;
    const int x0 = es.origin[e];
    const int base0 = es.vertex_offset[x0];
    for (int i = 0; i < graph.degree(x0); ++i) {
      const int eo = base0 + i;  // (x0 -> x_{-1})
      if (es.terminus[eo] == es.terminus[e]) continue;
      acc2 += izf_fstar[es.reversal[eo]];
    }
    r2 = std::max(r2, std::abs(acc2 - qv.f_star[e] +
                               cplx(0.0, eta0) * spec.psi(qv.j, x0)));
  }
  return {r1, r2};
}

// Phi_gamma(path) = Im G~(lifted endpoints) / sum_v N_gamma(v).
inline std::vector<double> phi_weights(const Graph& graph,
                                       const OrientedEdgeSet& es,
                                       const ZetaField& zf,
                                       const std::vector<NbPath>& paths) {
  const double denom =
      std::accumulate(zf.n_gamma.begin(), zf.n_gamma.end(), 0.0);
  std::vector<double> out;
  out.reserve(paths.size());
  for (const NbPath& p : paths)
    out.push_back(tree_green(graph, es, zf, p).imag() / denom);
  return out;
}

// <K>_gamma for a single H_k observable: sum over B_k of K(path) Phi(path).
inline cplx weighted_average_single(const Graph& graph,
                                    const OrientedEdgeSet& es,
                                    const ZetaField& zf, const Observable& obs,
                                    std::int64_t budget = kDefaultPathBudget) {
  const double denom =
      std::accumulate(zf.n_gamma.begin(), zf.n_gamma.end(), 0.0);
  cplx acc = 0.0;
  if (obs.k() == 0) {
    for (int x = 0; x < graph.vertex_count(); ++x)
      acc += obs.value(std::array<int, 1>{x}) * zf.n_gamma[x];
  } else {
    for_each_nb_path(
        graph, obs.k(),
        [&](const NbPath& p) {
          const cplx v = obs.value(p.vertices);
          if (v == cplx(0.0)) return;
          acc += v * tree_green(graph, es, zf, p).imag();
        },
        budget);
  }
  return acc / denom;
}

// <K>_gamma for a lifted kernel family (one observable per k <= R).
inline cplx weighted_average(const Graph& graph, const OrientedEdgeSet& es,
                             const ZetaField& zf,
                             const std::vector<Observable>& family,
                             std::int64_t budget = kDefaultPathBudget) {
  cplx acc = 0.0;
  for (const Observable& obs : family)
    acc += weighted_average_single(graph, es, zf, obs, budget);
  return acc;
}

struct VarianceTerm {
  int j = 0;
  double lambda = 0.0;
  double term = 0.0;
};

struct VarianceReport {
  Interval interval;
  double eta0 = 0.0;
  std::vector<VarianceTerm> terms;
  double aggregate = 0.0;  // (1/N) * sum of terms
  std::string observable_id;
  bool centered = false;
  std::string gamma_policy = "exact-per-eigenvalue";
  std::vector<int> multiplicities;  // eigenvalue cluster sizes inside I

  void finalize(int n) {
    aggregate = 0.0;
    for (const auto& t : terms) aggregate += t.term;
    aggregate /= n;
  }
};

inline std::vector<int> eigenvalue_multiplicities(const EigenSystem& spec,
                                                  const Interval& interval,
                                                  double tol = 1e-9) {
  std::vector<int> mult;
  double prev = 0.0;
  for (int j = 0; j < spec.size(); ++j) {
    if (!interval.contains(spec.lambda(j))) continue;
    if (!mult.empty() && std::abs(spec.lambda(j) - prev) <= tol)
      ++mult.back();
    else
      mult.push_back(1);
    prev = spec.lambda(j);
  }
  return mult;
}

// Var^I: (1/N) sum_{lambda_j in I} |<psi_j, K_G psi_j> - centered part|,
// where the centering subtracts <K>_{gamma_j} per eigenvalue.
inline VarianceReport quantum_variance(const Graph& graph,
                                       const OrientedEdgeSet& es,
                                       const EigenSystem& spec,
                                       ZetaPolicy& policy,
                                       const std::vector<Observable>& family,
                                       const Interval& interval, double eta0,
                                       bool centered,
                                       const std::string& observable_id = "") {
  VarianceReport rep;
  rep.interval = interval;
  rep.eta0 = eta0;
  rep.centered = centered;
  rep.observable_id = observable_id;
  rep.multiplicities = eigenvalue_multiplicities(spec, interval);

  const int n = graph.vertex_count();
  for (int j = 0; j < spec.size(); ++j) {
    if (!interval.contains(spec.lambda(j))) continue;
    cplx val = 0.0;
    const auto psi = spec.eigenvectors.col(j);
    for (const Observable& obs : family)
      val += kg_matrix_element(graph, obs, psi, psi);
    if (centered) {
      const ZetaField& zf = policy.solve(cplx(spec.lambda(j), eta0));
      val -= weighted_average(graph, es, zf, family);
    }
    rep.terms.push_back({j, spec.lambda(j), std::abs(val)});
  }
  rep.finalize(n);
  return rep;
}

// Var_nb: (1/N) sum |<f_j*, K_B^{gamma_j} f_j>|; the tilde variant pairs
// g_j*, g_j instead (zeta replaced by its conjugate).
inline VarianceReport nb_variance(
    const Graph& graph, const OrientedEdgeSet& es, const EigenSystem& spec,
    ZetaPolicy& policy, const std::function<Observable(cplx)>& obs_at_gamma,
    const Interval& interval, double eta0, bool tilde = false,
    const std::string& observable_id = "") {
  VarianceReport rep;
  rep.interval = interval;
  rep.eta0 = eta0;
  rep.observable_id = observable_id;
  rep.multiplicities = eigenvalue_multiplicities(spec, interval);

  const int n = graph.vertex_count();
  for (int j = 0; j < spec.size(); ++j) {
    if (!interval.contains(spec.lambda(j))) continue;
    const cplx gamma(spec.lambda(j), eta0);
    const ZetaField& zf = policy.solve(gamma);
    const QuasiEigenvectors qv =
        make_quasi_eigenvectors(graph, es, zf, spec, j);
    const Observable obs = obs_at_gamma(gamma);
    const cplx val =
        tilde ? kb_matrix_element(graph, es, obs, qv.g_star, qv.g)
              : kb_matrix_element(graph, es, obs, qv.f_star, qv.f);
    rep.terms.push_back({j, spec.lambda(j), std::abs(val)});
  }
  rep.finalize(n);
  return rep;
}

}  // namespace qergo

#endif  // QERGO_ERGODICITY_HPP
