#ifndef QERGO_TRANSFER_HPP
#define QERGO_TRANSFER_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qergo/cover_green.hpp"
#include "qergo/errors.hpp"
#include "qergo/graph.hpp"

namespace qergo {

enum class TransferKind { kSGamma, kSU, kSGammaAdjoint };

namespace detail {

inline int forward_edge(const Graph& g, const OrientedEdgeSet& es, int u,
                        int v) {
  return es.index_of(g, u, v);
}

}  // namespace detail

// Transfer operators on dense H_k path functions (k >= 1):
//  S_gamma:   (S K)(x_0;x_k)  = xi(x_1->x_0) sum_{x_{-1} != x_1}
//                               |Im zeta(x_0->x_{-1})| K(x_{-1};x_{k-1})
//  S_{u}:     same with an extra phase conj(u(x_0->x_{-1}))
//  S_gamma^*: (S*K)(x_0;x_k) = xi(x_{k-1}->x_k) sum_{x_{k+1} != x_{k-1}}
//                               |Im zeta(x_k->x_{k+1})| K(x_1;x_{k+1})
inline std::vector<cplx> transfer_apply(const Graph& g,
                                        const OrientedEdgeSet& es,
                                        const ZetaField& zf, TransferKind kind,
                                        const PathTable& table,
                                        std::span<const cplx> f) {
  const int k = table.k();
  if (k < 1) throw Error("transfer operators act on H_k with k >= 1");
  std::vector<cplx> out(table.size(), cplx(0.0));
  std::vector<int> shifted;
  shifted.reserve(static_cast<std::size_t>(k) + 1);

  for (int i = 0; i < table.size(); ++i) {
    const auto& vs = table.path(i).vertices;
    if (kind == TransferKind::kSGammaAdjoint) {
      const int ek = detail::forward_edge(g, es, vs[k - 1], vs[k]);
      shifted.assign(vs.begin() + 1, vs.end());
      shifted.push_back(0);
      cplx acc = 0.0;
      for (const int v : g.neighbors(vs[k])) {
        if (v == vs[k - 1]) continue;
        const int enext = detail::forward_edge(g, es, vs[k], v);
        shifted.back() = v;
        acc += std::abs(zf.zeta[enext].imag()) * f[table.index_of(shifted)];
      }
      out[i] = zf.xi[ek] * acc;
    } else {
      const int e1r = es.reversal[detail::forward_edge(g, es, vs[0], vs[1])];
      shifted.assign(1, 0);
      shifted.insert(shifted.end(), vs.begin(), vs.end() - 1);
      cplx acc = 0.0;
      for (const int v : g.neighbors(vs[0])) {
        if (v == vs[1]) continue;
        const int eprev = detail::forward_edge(g, es, vs[0], v);
        shifted.front() = v;
        cplx weight = std::abs(zf.zeta[eprev].imag());
        if (kind == TransferKind::kSU) weight *= std::conj(zf.u[eprev]);
        acc += weight * f[table.index_of(shifted)];
      }
      out[i] = zf.xi[e1r] * acc;
    }
  }
  return out;
}

// Row sums of S_gamma and S_gamma^*; exactly 1 - eta * xi at the relevant
// boundary edge of the path.
inline std::vector<double> transfer_row_sums(const Graph& g,
                                             const OrientedEdgeSet& es,
                                             const ZetaField& zf,
                                             TransferKind kind,
                                             const PathTable& table) {
  const int k = table.k();
  std::vector<double> sums(table.size(), 0.0);
  for (int i = 0; i < table.size(); ++i) {
    const auto& vs = table.path(i).vertices;
    if (kind == TransferKind::kSGammaAdjoint) {
      const int ek = detail::forward_edge(g, es, vs[k - 1], vs[k]);
      double acc = 0.0;
      for (const int v : g.neighbors(vs[k]))
        if (v != vs[k - 1])
          acc += std::abs(
              zf.zeta[detail::forward_edge(g, es, vs[k], v)].imag());
      sums[i] = zf.xi[ek] * acc;
    } else {
      const int e1r = es.reversal[detail::forward_edge(g, es, vs[0], vs[1])];
      double acc = 0.0;
      for (const int v : g.neighbors(vs[0]))
        if (v != vs[1])
          acc += std::abs(
              zf.zeta[detail::forward_edge(g, es, vs[0], v)].imag());
      sums[i] = zf.xi[e1r] * acc;
    }
  }
  return sums;
}

// l^2(mu_k) scalar product: <f, g>_mu = sum_path mu(path) conj(f) g.
inline cplx mu_inner(const NbMeasure& mu, std::span<const cplx> f,
                     std::span<const cplx> g) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < mu.values.size(); ++i)
    acc += mu.values[i] * std::conj(f[i]) * g[i];
  return acc;
}

// The gamma-weighted scalar product on H_k (k >= 1):
// <K1, K2>_gamma = (1/N) sum W(x_1->x_0) conj(K1) K2 W(x_{k-1}->x_k),
// with W(e) = |Im zeta(e)| / |zeta(e)|^2.
inline cplx gamma_inner(const Graph& g, const OrientedEdgeSet& es,
                        const ZetaField& zf, const PathTable& table,
                        std::span<const cplx> k1, std::span<const cplx> k2) {
  const int k = table.k();
  if (k < 1) throw Error("gamma_inner needs k >= 1");
  cplx acc = 0.0;
  for (int i = 0; i < table.size(); ++i) {
    const auto& vs = table.path(i).vertices;
    const int e1r = es.reversal[detail::forward_edge(g, es, vs[0], vs[1])];
    const int ek = detail::forward_edge(g, es, vs[k - 1], vs[k]);
    const double w_first =
        std::abs(zf.zeta[e1r].imag()) / std::norm(zf.zeta[e1r]);
    const double w_last =
        std::abs(zf.zeta[ek].imag()) / std::norm(zf.zeta[ek]);
    acc += w_first * std::conj(k1[i]) * k2[i] * w_last;
  }
  return acc / static_cast<double>(g.vertex_count());
}

inline double gamma_norm(const Graph& g, const OrientedEdgeSet& es,
                         const ZetaField& zf, const PathTable& table,
                         std::span<const cplx> k1) {
  return std::sqrt(std::abs(gamma_inner(g, es, zf, table, k1, k1)));
}

// (Z_gamma K)(x_0;x_k) = zeta(x_0->x_1) ... zeta(x_{k-1}->x_k) K(x_0;x_k).
inline std::vector<cplx> apply_z(const Graph& g, const OrientedEdgeSet& es,
                                 const ZetaField& zf, const PathTable& table,
                                 std::span<const cplx> f, bool inverse = false) {
  std::vector<cplx> out(table.size());
  for (int i = 0; i < table.size(); ++i) {
    const auto& vs = table.path(i).vertices;
    cplx prod = 1.0;
    for (std::size_t j = 0; j + 1 < vs.size(); ++j)
      prod *= zf.zeta[detail::forward_edge(g, es, vs[j], vs[j + 1])];
    out[i] = inverse ? f[i] / prod : f[i] * prod;
  }
  return out;
}

// (R_{n,r} K)(x_0;x_{n+k}):
//   conj(zeta_{x_1}(x_0) ... zeta_{x_a}(x_{a-1})) K(x_a;x_{a+k})
//   * zeta_{x_{a+k}}(x_{a+k+1}) ... zeta_{x_{n+k-1}}(x_{n+k}),  a = n - r.
inline std::vector<cplx> apply_r_nr(const Graph& g, const OrientedEdgeSet& es,
                                    const ZetaField& zf, int n, int r,
                                    const PathTable& table_k,
                                    std::span<const cplx> f,
                                    const PathTable& table_out) {
  if (r < 0 || r > n) throw Error("apply_r_nr needs 0 <= r <= n");
  const int k = table_k.k();
  if (table_out.k() != n + k) throw Error("output table must hold B_{n+k}");
  const int a = n - r;
  std::vector<cplx> out(table_out.size());
  for (int i = 0; i < table_out.size(); ++i) {
    const auto& vs = table_out.path(i).vertices;
    cplx prefix = 1.0;
    for (int j = 0; j < a; ++j)
      prefix *= zf.zeta[detail::forward_edge(g, es, vs[j + 1], vs[j])];
    cplx suffix = 1.0;
    for (int j = a + k; j < n + k; ++j)
      suffix *= zf.zeta[detail::forward_edge(g, es, vs[j], vs[j + 1])];
    const int mid = table_k.index_of(
        std::span<const int>(vs.data() + a, static_cast<std::size_t>(k) + 1));
    out[i] = std::conj(prefix) * f[mid] * suffix;
  }
  return out;
}

// The explicit eta-proportional remainder O_{n,r,r'}(eta_1, K) in the
// reconciliation
//   <R_{n,r} K, R_{n,r'} K>_gamma
//     = (1/N) <S_u^{r-r'} m K', m K'>_{mu_k} - O_{n,r,r'}   (K = Z_gamma K'),
// obtained by telescoping the sum-rule over the common prefix (front terms,
// s = 1..n-r) and the common suffix (back terms, s' = n-r'+k..n+k-1).
inline cplx nicer_remainder(const Graph& g, const OrientedEdgeSet& es,
                            const ZetaField& zf, int n, int r, int rp,
                            const PathTable& table_k, std::span<const cplx> f,
                            std::int64_t budget = kDefaultPathBudget) {
  if (rp > r) throw Error("remainder assumes r >= r'");
  const int k = table_k.k();
  const int a = n - r;
  const int ap = n - rp;
  const double eta1 = zf.eta();
  const double n_vertices = g.vertex_count();

  auto rev_zeta = [&](std::span<const int> vs, int j) {
    // zeta_{x_{j+1}}(x_j) along the enumerated path
    return zf.zeta[es.reversal[detail::forward_edge(g, es, vs[j], vs[j + 1])]];
  };
  auto fwd_zeta = [&](std::span<const int> vs, int j) {
    // zeta_{x_j}(x_{j+1})
    return zf.zeta[detail::forward_edge(g, es, vs[j], vs[j + 1])];
  };

  cplx total = 0.0;

  // Front terms: paths enumerate (x_s, ..., x_{n+k}).
  for (int s = 1; s <= a; ++s) {
    const int off = s;
    cplx acc = 0.0;
    for_each_nb_path(
        g, n + k - s,
        [&](const NbPath& p) {
          const std::span<const int> vs(p.vertices);
          cplx term = 1.0;
          for (int j = s; j < a; ++j) {
            const cplx z = rev_zeta(vs, j - off);
            term *= std::norm(z);
          }
          cplx cross = 1.0;
          for (int j = a; j < ap; ++j) cross *= rev_zeta(vs, j - off);
          for (int j = a + k; j < ap + k; ++j) cross *= fwd_zeta(vs, j - off);
          const int mid_r = table_k.index_of(
              vs.subspan(static_cast<std::size_t>(a - off),
                         static_cast<std::size_t>(k) + 1));
          const int mid_rp = table_k.index_of(
              vs.subspan(static_cast<std::size_t>(ap - off),
                         static_cast<std::size_t>(k) + 1));
          term *= std::conj(cross * f[mid_r]) * f[mid_rp];
          for (int j = ap + k; j < n + k - 1; ++j)
            term *= std::norm(fwd_zeta(vs, j - off));
          term *= std::abs(fwd_zeta(vs, n + k - 1 - off).imag());
          acc += term;
        },
        budget);
    total += acc;
  }

  // Back terms: paths enumerate (x_a, ..., x_{s'}).
  for (int sp = ap + k; sp <= n + k - 1; ++sp) {
    const int off = a;
    cplx acc = 0.0;
    for_each_nb_path(
        g, sp - a,
        [&](const NbPath& p) {
          const std::span<const int> vs(p.vertices);
          const cplx z_first = rev_zeta(vs, 0);
          cplx term = std::abs(z_first.imag()) / std::norm(z_first);
          cplx cross = 1.0;
          for (int j = a; j < ap; ++j) cross *= rev_zeta(vs, j - off);
          for (int j = a + k; j < ap + k; ++j) cross *= fwd_zeta(vs, j - off);
          const int mid_r =
              table_k.index_of(vs.subspan(0, static_cast<std::size_t>(k) + 1));
          const int mid_rp = table_k.index_of(
              vs.subspan(static_cast<std::size_t>(ap - off),
                         static_cast<std::size_t>(k) + 1));
          term *= std::conj(cross * f[mid_r]) * f[mid_rp];
          for (int j = ap + k; j < sp; ++j)
            term *= std::norm(fwd_zeta(vs, j - off));
          acc += term;
        },
        budget);
    total += acc;
  }

  return eta1 / n_vertices * total;
}

}  // namespace qergo

#endif  // QERGO_TRANSFER_HPP
