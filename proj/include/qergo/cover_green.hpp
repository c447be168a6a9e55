#ifndef QERGO_COVER_GREEN_HPP
#define QERGO_COVER_GREEN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qergo/ensembles.hpp"
#include "qergo/errors.hpp"
#include "qergo/graph.hpp"

namespace qergo {

using cplx = std::complex<double>;

// Solution of the directed-edge fixed point
//   zeta(w->v) = 1 / (gamma - W(v) - sum_{u ~ v, u != w} zeta(v->u)),
// i.e. the restricted Green values of the universal covering tree, stored per
// oriented edge of the base graph. The value at e = (w->v) is zeta_w(v): the
// diagonal sits at v and the branch through w is removed.
struct ZetaField {
  cplx gamma;
  std::vector<cplx> zeta;     // per oriented edge
  std::vector<cplx> m;        // per vertex, 2m_v = gamma - W(v) - sum zeta_v(u)
  std::vector<double> n_gamma;  // Im of the cover-diagonal Green value
  std::vector<cplx> u;        // conj(zeta)/zeta, unimodular
  std::vector<double> xi;     // |zeta|^2 / |Im zeta|
  double solve_residual = 0.0;

  double eta() const { return gamma.imag(); }
};

struct ZetaSolveOptions {
  double tol = 1e-12;
  int max_iterations = 50000;
  // Optional warm start; must match the edge count.
  const std::vector<cplx>* initial = nullptr;
};

namespace detail {

inline void finish_field(const Graph& g, const OrientedEdgeSet& es,
                         const Potential& w, ZetaField& zf) {
  const int n = g.vertex_count();
  const int b = es.edge_count();
  zf.m.assign(n, cplx(0.0));
  zf.n_gamma.assign(n, 0.0);
  zf.u.resize(b);
  zf.xi.resize(b);
  std::vector<cplx> out_sum(n, cplx(0.0));
  for (int e = 0; e < b; ++e) out_sum[es.origin[e]] += zf.zeta[e];
  for (int v = 0; v < n; ++v) {
    zf.m[v] = 0.5 * (zf.gamma - w.values[v] - out_sum[v]);
    zf.n_gamma[v] = std::imag(-1.0 / (2.0 * zf.m[v]));
  }
  for (int e = 0; e < b; ++e) {
    zf.u[e] = std::conj(zf.zeta[e]) / zf.zeta[e];
    zf.xi[e] = std::norm(zf.zeta[e]) / std::abs(zf.zeta[e].imag());
  }
}

}  // namespace detail

// Plain Picard iteration with synchronous (Jacobi) sweeps from
// zeta = -i. Converges for moderate Im gamma; use continuation_solve to
// reach small eta.
inline ZetaField solve_zeta(const Graph& g, const OrientedEdgeSet& es,
                            const Potential& w, cplx gamma,
                            const ZetaSolveOptions& opts = {}) {
  if (gamma.imag() <= 0.0)
    throw RealAxisParameterError("solve_zeta needs Im gamma > 0");
  const int b = es.edge_count();
  const int n = g.vertex_count();

  std::vector<cplx> cur;
  if (opts.initial != nullptr) {
    if (static_cast<int>(opts.initial->size()) != b)
      throw Error("warm start has wrong edge count");
    cur = *opts.initial;
  } else {
    cur.assign(b, cplx(0.0, -1.0));
  }
  std::vector<cplx> next(b);
  std::vector<cplx> out_sum(n);

  double residual = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    std::fill(out_sum.begin(), out_sum.end(), cplx(0.0));
    for (int e = 0; e < b; ++e) out_sum[es.origin[e]] += cur[e];

    double step = 0.0;
    for (int e = 0; e < b; ++e) {
      const int v = es.terminus[e];
      const cplx denom =
          gamma - w.values[v] - (out_sum[v] - cur[es.reversal[e]]);
      const cplx z = 1.0 / denom;
      if (!(z.imag() < 0.0))
        throw HalfPlaneViolationError(
            "zeta iterate left the lower half-plane at edge " +
            std::to_string(e));
      step = std::max(step, std::abs(z - cur[e]));
      next[e] = z;
    }
    cur.swap(next);

    if (step < opts.tol) {
      // Fixed-point residual of eq. gamma = W + sum zeta + 1/zeta.
      std::fill(out_sum.begin(), out_sum.end(), cplx(0.0));
      for (int e = 0; e < b; ++e) out_sum[es.origin[e]] += cur[e];
      residual = 0.0;
      for (int e = 0; e < b; ++e) {
        const int v = es.terminus[e];
        const cplx r = gamma - w.values[v] -
                       (out_sum[v] - cur[es.reversal[e]]) - 1.0 / cur[e];
        residual = std::max(residual, std::abs(r));
      }
      if (residual < opts.tol) {
        ZetaField zf;
        zf.gamma = gamma;
        zf.zeta = std::move(cur);
        zf.solve_residual = residual;
        detail::finish_field(g, es, w, zf);
        return zf;
      }
    }
  }
  throw NoConvergenceError("zeta iteration did not reach tol " +
                           std::to_string(opts.tol) + " at Im gamma " +
                           std::to_string(gamma.imag()));
}

// Geometric continuation in Im gamma: solve at eta = 1, halve until
// eta_target, warm-starting each rung. The last rung is exactly eta_target.
inline ZetaField continuation_solve(const Graph& g, const OrientedEdgeSet& es,
                                    const Potential& w, double lambda,
                                    double eta_target, double tol = 1e-12,
                                    int max_iterations = 50000) {
  if (eta_target <= 0.0)
    throw RealAxisParameterError("continuation needs eta_target > 0");
  std::vector<double> ladder;
  for (double eta = 1.0; eta > eta_target; eta *= 0.5) ladder.push_back(eta);
  ladder.push_back(eta_target);

  ZetaField zf;
  std::vector<cplx> warm;
  for (std::size_t rung = 0; rung < ladder.size(); ++rung) {
    ZetaSolveOptions opts;
    opts.tol = tol;
    opts.max_iterations = max_iterations;
    if (rung > 0) opts.initial = &warm;
    try {
      zf = solve_zeta(g, es, w, cplx(lambda, ladder[rung]), opts);
    } catch (const NoConvergenceError& err) {
      throw NoConvergenceError(
          std::string(err.what()) + " (continuation rung " +
              std::to_string(rung) + " of " + std::to_string(ladder.size()) +
              ", eta = " + std::to_string(ladder[rung]) + ")",
          static_cast<int>(rung));
    }
    warm = zf.zeta;
  }
  return zf;
}

// Cancels immediate backtracks; the reduced word is the geodesic the walk
// lifts to on the covering tree.
inline std::vector<int> reduce_walk(std::span<const int> walk) {
  std::vector<int> out;
  out.reserve(walk.size());
  for (const int v : walk) {
    if (out.size() >= 2 && out[out.size() - 2] == v)
      out.pop_back();
    else
      out.push_back(v);
  }
  return out;
}

// Covering-tree Green value between the lifted endpoints of a walk:
// G(v_0, v_k) = - prod_j zeta_{v_{j+1}}(v_j) / (2 m_{v_k}).
inline cplx tree_green(const Graph& g, const OrientedEdgeSet& es,
                       const ZetaField& zf, std::span<const int> walk) {
  const std::vector<int> path = reduce_walk(walk);
  cplx prod = 1.0;
  for (std::size_t j = 0; j + 1 < path.size(); ++j) {
    const int rev = es.index_of(g, path[j + 1], path[j]);
    prod *= zf.zeta[rev];
  }
  return -prod / (2.0 * zf.m[path.back()]);
}

inline cplx tree_green(const Graph& g, const OrientedEdgeSet& es,
                       const ZetaField& zf, const NbPath& p) {
  return tree_green(g, es, zf, std::span<const int>(p.vertices));
}

// Im of the cover Green value; the paper's Psi_{gamma,v}(w).
inline double psi_im(const Graph& g, const OrientedEdgeSet& es,
                     const ZetaField& zf, std::span<const int> walk) {
  return tree_green(g, es, zf, walk).imag();
}

// Max absolute residual per exact identity over a path sample. Edge-local
// identities are always checked on every oriented edge.
struct IdentityReport {
  double green3 = 0.0;
  double mv = 0.0;
  double sumzeta = 0.0;
  double idpsi = 0.0;
  double psiiden1 = 0.0;
  double psiiden2 = 0.0;
  double multigreen3 = 0.0;
  double greensym = 0.0;

  double max() const {
    return std::max({green3, mv, sumzeta, idpsi, psiiden1, psiiden2,
                     multigreen3, greensym});
  }
};

inline IdentityReport identity_residuals(const Graph& g,
                                         const OrientedEdgeSet& es,
                                         const Potential& w,
                                         const ZetaField& zf,
                                         const std::vector<NbPath>& sample) {
  IdentityReport rep;
  const int b = es.edge_count();
  const int n = g.vertex_count();
  const double eta = zf.eta();

  std::vector<cplx> out_sum(n, cplx(0.0));
  for (int e = 0; e < b; ++e) out_sum[es.origin[e]] += zf.zeta[e];

  for (int e = 0; e < b; ++e) {
    const int v = es.terminus[e];
    const int w0 = es.origin[e];
    const cplx ze = zf.zeta[e];
    const cplx zrev = zf.zeta[es.reversal[e]];

    // gamma = W(v) + sum_{u != w} zeta_v(u) + 1/zeta_w(v)
    rep.green3 = std::max(
        rep.green3, std::abs(zf.gamma - w.values[v] -
                             (out_sum[v] - zrev) - 1.0 / ze));

    // zeta_w(v) = (m_w/m_v) zeta_v(w)  and  1/zeta_w(v) - zeta_v(w) = 2 m_v
    rep.mv = std::max(rep.mv,
                      std::abs(ze - (zf.m[w0] / zf.m[v]) * zrev));
    rep.mv = std::max(rep.mv, std::abs(1.0 / ze - zrev - 2.0 * zf.m[v]));

    // sum_{u in N_v \ {w}} |Im zeta_v(u)| = |Im zeta_w(v)|/|zeta_w(v)|^2 - eta
    double lhs = 0.0;
    const int base = es.vertex_offset[v];
    for (int i = 0; i < g.degree(v); ++i) {
      const int e2 = base + i;
      if (es.terminus[e2] == w0) continue;
      lhs += std::abs(zf.zeta[e2].imag());
    }
    rep.sumzeta = std::max(
        rep.sumzeta,
        std::abs(lhs - std::abs(ze.imag()) / std::norm(ze) + eta));

    // psiiden1 on the edge (v_0, v_1) = (w0, v).
    {
      const double p11 = psi_im(g, es, zf, std::array<int, 1>{v});
      const double p00 = psi_im(g, es, zf, std::array<int, 1>{w0});
      const double p01 = psi_im(g, es, zf, std::array<int, 2>{w0, v});
      const cplx lhs1 = p11 - std::conj(ze) * p01 - ze * p01 +
                        std::norm(ze) * p00;
      rep.psiiden1 = std::max(rep.psiiden1,
                              std::abs(lhs1 - std::abs(ze.imag())));
    }
  }

  for (const NbPath& p : sample) {
    const auto& vs = p.vertices;
    const int k = p.length();
    if (k < 1) continue;

    const cplx g0k = tree_green(g, es, zf, vs);
    std::vector<int> rev(vs.rbegin(), vs.rend());
    rep.greensym = std::max(rep.greensym,
                            std::abs(g0k - tree_green(g, es, zf, rev)));

    const cplx zeta_first_rev = zf.zeta[es.index_of(g, vs[1], vs[0])];
    const cplx zeta_last = zf.zeta[es.index_of(g, vs[k - 1], vs[k])];
    const std::span<const int> tail(vs.data() + 1, vs.size() - 1);
    const std::span<const int> head(vs.data(), vs.size() - 1);
    rep.multigreen3 = std::max(
        rep.multigreen3,
        std::abs(g0k - zeta_first_rev * tree_green(g, es, zf, tail)));
    rep.multigreen3 = std::max(
        rep.multigreen3,
        std::abs(g0k - zeta_last * tree_green(g, es, zf, head)));

    // idpsi: Psi_{v_0}(v_k) - zeta_{v_{k-1}}(v_k) Psi_{v_0}(v_{k-1})
    //        = Im zeta_{v_{k-1}}(v_k) * conj(G(v_0, v_{k-1})).
    const cplx ghead = tree_green(g, es, zf, head);
    const cplx lhs = cplx(g0k.imag()) - zeta_last * cplx(ghead.imag());
    rep.idpsi = std::max(
        rep.idpsi, std::abs(lhs - zeta_last.imag() * std::conj(ghead)));

    // psiiden2 needs Psi at the three shifted walks. For k = 1 the middle
    // walk (v_1, ..., v_{k-1}) degenerates to the reversed edge.
    {
      const double p0k = g0k.imag();
      const double p1k = psi_im(g, es, zf, tail);
      const double p0k1 = ghead.imag();
      const double p1k1 =
          k == 1 ? psi_im(g, es, zf, std::array<int, 2>{vs[1], vs[0]})
                 : psi_im(g, es, zf,
                          std::span<const int>(vs.data() + 1, vs.size() - 2));
      const cplx r = p0k - std::conj(zeta_first_rev) * p1k -
                     zeta_last * p0k1 +
                     std::conj(zeta_first_rev) * zeta_last * p1k1;
      rep.psiiden2 = std::max(rep.psiiden2, std::abs(r));
    }
  }
  return rep;
}

// Positive measure mu_k on B_k together with the per-path defects of the
// Kolmogorov compatibility and stationarity inequalities. For k = 1 the
// reference vertex measure is
//   mu_0(v) = ((2 Im m_v)^2 - sum_u (Im zeta_v(u))^2) / |m_v|^2,
// the unique choice making both k = 1 defects exactly 4 eta N_gamma(v) >= 0.
struct NbMeasure {
  int k = 1;
  std::vector<double> values;          // per B_k path, enumeration order
  double total_mass = 0.0;
  std::vector<double> compat_defects;  // per B_{k-1} path (k>=2) or vertex
  std::vector<double> inv_defects;     // same indexing
};

namespace detail {

inline double mu_value(const Graph& g, const OrientedEdgeSet& es,
                       const ZetaField& zf, std::span<const int> vs) {
  const int k = static_cast<int>(vs.size()) - 1;
  const int e1 = es.index_of(g, vs[0], vs[1]);
  const int e1r = es.reversal[e1];
  double value = std::abs(zf.zeta[e1r].imag()) /
                 std::norm(zf.m[vs[1]] * zf.zeta[e1]);
  for (int j = 0; j < k; ++j)
    value *= std::norm(zf.zeta[es.index_of(g, vs[j], vs[j + 1])]);
  const int ek = es.index_of(g, vs[k - 1], vs[k]);
  value *= std::abs(zf.zeta[ek].imag()) / std::norm(zf.zeta[ek]);
  return value;
}

inline double mu0_value(const Graph& g, const OrientedEdgeSet& es,
                        const ZetaField& zf, int v) {
  const double two_im_m = 2.0 * zf.m[v].imag();
  double sq = 0.0;
  const int base = es.vertex_offset[v];
  for (int i = 0; i < g.degree(v); ++i) {
    const double im = zf.zeta[base + i].imag();
    sq += im * im;
  }
  return (two_im_m * two_im_m - sq) / std::norm(zf.m[v]);
}

}  // namespace detail

inline NbMeasure mu_k(const Graph& g, const OrientedEdgeSet& es,
                      const ZetaField& zf, int k,
                      std::int64_t budget = kDefaultPathBudget) {
  if (k < 1) throw Error("mu_k needs k >= 1");
  NbMeasure mu;
  mu.k = k;

  const PathTable table(g, k, budget);
  mu.values.resize(table.size());
  for (int i = 0; i < table.size(); ++i) {
    mu.values[i] = detail::mu_value(g, es, zf, table.path(i).vertices);
    mu.total_mass += mu.values[i];
  }

  if (k == 1) {
    const int n = g.vertex_count();
    mu.compat_defects.assign(n, 0.0);
    mu.inv_defects.assign(n, 0.0);
    for (int v = 0; v < n; ++v) {
      const double mu0 = detail::mu0_value(g, es, zf, v);
      mu.compat_defects[v] = mu0;
      mu.inv_defects[v] = mu0;
    }
    for (int e = 0; e < es.edge_count(); ++e) {
      mu.compat_defects[es.origin[e]] -= mu.values[e];
      mu.inv_defects[es.terminus[e]] -= mu.values[e];
    }
    return mu;
  }

  const PathTable shorter(g, k - 1, budget);
  mu.compat_defects.resize(shorter.size());
  mu.inv_defects.resize(shorter.size());
  for (int i = 0; i < shorter.size(); ++i) {
    const auto& vs = shorter.path(i).vertices;
    mu.compat_defects[i] = detail::mu_value(g, es, zf, vs);
    mu.inv_defects[i] = mu.compat_defects[i];
  }
  for (int i = 0; i < table.size(); ++i) {
    const auto& vs = table.path(i).vertices;
    const int prefix =
        shorter.index_of(std::span<const int>(vs.data(), vs.size() - 1));
    const int suffix =
        shorter.index_of(std::span<const int>(vs.data() + 1, vs.size() - 1));
    mu.compat_defects[prefix] -= mu.values[i];
    mu.inv_defects[suffix] -= mu.values[i];
  }
  return mu;
}

// Shared access to zeta fields at many spectral parameters: warm starts along
// sorted solves, caches recently solved fields (FIFO-capped; a returned
// reference stays valid for at least `kCacheCap - 1` subsequent distinct
// solves), falls back to continuation when plain iteration stalls.
class ZetaPolicy {
 public:
  static constexpr std::size_t kCacheCap = 64;

  ZetaPolicy(const Graph& g, const OrientedEdgeSet& es, const Potential& w,
             double tol = 1e-12)
      : g_(&g), es_(&es), w_(&w), tol_(tol) {}

  double tol() const { return tol_; }

  // Approximate speed mode: snap Re gamma to a grid of this spacing and
  // reuse fields across nearby eigenvalues. Never enabled for acceptance
  // runs; the identities are exact only at the true gamma_j.
  void enable_coarse_grid(double spacing) { coarse_spacing_ = spacing; }

  const ZetaField& solve(cplx gamma) {
    if (coarse_spacing_ > 0.0)
      gamma = cplx(std::round(gamma.real() / coarse_spacing_) *
                       coarse_spacing_,
                   gamma.imag());
    const auto key = std::make_pair(gamma.real(), gamma.imag());
    const auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;

    ZetaSolveOptions opts;
    opts.tol = tol_;
    if (last_ != nullptr && std::abs(last_gamma_ - gamma) < 0.5)
      opts.initial = &last_->zeta;
    std::shared_ptr<ZetaField> field;
    try {
      field = std::make_shared<ZetaField>(
          solve_zeta(*g_, *es_, *w_, gamma, opts));
    } catch (const NoConvergenceError&) {
      field = std::make_shared<ZetaField>(continuation_solve(
          *g_, *es_, *w_, gamma.real(), gamma.imag(), tol_));
    }
    last_ = field;
    last_gamma_ = gamma;
    cache_.emplace(key, field);
    order_.push_back(key);
    if (order_.size() > kCacheCap) {
      cache_.erase(order_.front());
      order_.erase(order_.begin());
    }
    return *field;
  }

 private:
  const Graph* g_;
  const OrientedEdgeSet* es_;
  const Potential* w_;
  double tol_;
  double coarse_spacing_ = 0.0;
  std::map<std::pair<double, double>, std::shared_ptr<ZetaField>> cache_;
  std::vector<std::pair<double, double>> order_;
  std::shared_ptr<ZetaField> last_;
  cplx last_gamma_{0.0, 0.0};
};

}  // namespace qergo

#endif  // QERGO_COVER_GREEN_HPP
