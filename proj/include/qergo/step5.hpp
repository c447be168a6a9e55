#ifndef QERGO_STEP5_HPP
#define QERGO_STEP5_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "qergo/cover_green.hpp"
#include "qergo/ergodicity.hpp"
#include "qergo/errors.hpp"
#include "qergo/graph.hpp"
#include "qergo/rng.hpp"
#include "qergo/spectral.hpp"

namespace qergo {

constexpr double kDegenerateDenominatorTol = 1e-8;

// (P_gamma J)(x) = (1/N_gamma(x)) sum_{y ~ x} (N_gamma(y)/d(y)) J(y),
// the N_gamma/d conjugation of the random-walk Laplacian.
inline std::vector<cplx> apply_p_gamma(const Graph& g, const ZetaField& zf,
                                       std::span<const cplx> j_fn) {
  const int n = g.vertex_count();
  std::vector<cplx> out(n, cplx(0.0));
  for (int x = 0; x < n; ++x) {
    cplx acc = 0.0;
    for (const int y : g.neighbors(x))
      acc += zf.n_gamma[y] / static_cast<double>(g.degree(y)) * j_fn[y];
    out[x] = acc / zf.n_gamma[x];
  }
  return out;
}

// S_{T,gamma} = (1/T) sum_{s=0}^{T-1} (T-s) P_gamma^s.
inline std::vector<cplx> apply_s_t(const Graph& g, const ZetaField& zf, int T,
                                   std::span<const cplx> j_fn) {
  if (T < 1) throw Error("S_{T,gamma} needs T >= 1");
  std::vector<cplx> power(j_fn.begin(), j_fn.end());
  std::vector<cplx> acc(j_fn.size(), cplx(0.0));
  for (int s = 0; s < T; ++s) {
    const double coeff = static_cast<double>(T - s) / T;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += coeff * power[i];
    if (s + 1 < T) power = apply_p_gamma(g, zf, power);
  }
  return acc;
}

// S~_{T,gamma} = (1/T) sum_{s=1}^{T} P_gamma^s.
inline std::vector<cplx> apply_s_t_tilde(const Graph& g, const ZetaField& zf,
                                         int T, std::span<const cplx> j_fn) {
  if (T < 1) throw Error("S~_{T,gamma} needs T >= 1");
  std::vector<cplx> power(j_fn.begin(), j_fn.end());
  std::vector<cplx> acc(j_fn.size(), cplx(0.0));
  for (int s = 1; s <= T; ++s) {
    power = apply_p_gamma(g, zf, power);
    for (std::size_t i = 0; i < acc.size(); ++i)
      acc[i] += power[i] / static_cast<double>(T);
  }
  return acc;
}

// L^gamma and L~^gamma from H_0 to edge functions.
inline std::vector<cplx> apply_l(const Graph& g, const OrientedEdgeSet& es,
                                 const ZetaField& zf, std::span<const cplx> j_fn,
                                 bool tilde = false) {
  (void)g;
  const int b = es.edge_count();
  std::vector<cplx> out(b);
  for (int e = 0; e < b; ++e) {
    const int x0 = es.origin[e];
    const int x1 = es.terminus[e];
    const cplx ze = zf.zeta[e];
    const cplx zr = zf.zeta[es.reversal[e]];
    const double front = std::norm(ze) / std::norm(2.0 * zf.m[x0]);
    const cplx cross = tilde ? ze * std::conj(zr) : std::conj(ze) * zr;
    out[e] = front * (j_fn[x0] / zf.n_gamma[x1] -
                      j_fn[x1] / (cross * zf.n_gamma[x0]));
  }
  return out;
}

// Result of T^gamma / T~^gamma; near-singular denominators are flagged and
// the affected edges carry the value 0.
struct EdgeOpResult {
  std::vector<cplx> values;
  std::vector<int> skipped_edges;
  bool clean() const { return skipped_edges.empty(); }
};

// (T K)(x0,x1) = c/(c-1) (-K(x0,x1)/(conj(zeta_{x0}(x1)) zeta_{x1}(x0))
//                + K(x1,x0)),  c = |zeta_{x0}(x1) zeta_{x1}(x0)|^2.
inline EdgeOpResult apply_t(const Graph& g, const OrientedEdgeSet& es,
                            const ZetaField& zf, std::span<const cplx> k_fn,
                            double denom_tol = kDegenerateDenominatorTol) {
  (void)g;
  const int b = es.edge_count();
  EdgeOpResult res;
  res.values.assign(b, cplx(0.0));
  for (int e = 0; e < b; ++e) {
    const cplx ze = zf.zeta[e];
    const cplx zr = zf.zeta[es.reversal[e]];
    const double c = std::norm(ze * zr);
    if (std::abs(c - 1.0) <= denom_tol) {
      res.skipped_edges.push_back(e);
      continue;
    }
    res.values[e] = c / (c - 1.0) *
                    (-k_fn[e] / (std::conj(ze) * zr) + k_fn[es.reversal[e]]);
  }
  return res;
}

// (T~ K)(x0,x1) = cz/(cz+1) K(x0,x1), cz = conj(zeta_{x1}(x0)) zeta_{x0}(x1).
inline EdgeOpResult apply_t_tilde(const Graph& g, const OrientedEdgeSet& es,
                                  const ZetaField& zf,
                                  std::span<const cplx> k_fn,
                                  double denom_tol = kDegenerateDenominatorTol) {
  (void)g;
  const int b = es.edge_count();
  EdgeOpResult res;
  res.values.assign(b, cplx(0.0));
  for (int e = 0; e < b; ++e) {
    const cplx cz = std::conj(zf.zeta[es.reversal[e]]) * zf.zeta[e];
    if (std::abs(cz + 1.0) <= denom_tol) {
      res.skipped_edges.push_back(e);
      continue;
    }
    res.values[e] = cz / (cz + 1.0) * k_fn[e];
  }
  return res;
}

// (O_1 K)(x0) = sum_{x_{-1} ~ x0} (TK)(x_{-1},x0) / zeta_{x_{-1}}(x0)
//             + sum_{x1 ~ x0}     (TK)(x0,x1) / conj(zeta_{x1}(x0)),
// applied to an already T- (or T~-) transformed edge function.
inline std::vector<cplx> apply_o1_from_t(const Graph& g,
                                         const OrientedEdgeSet& es,
                                         const ZetaField& zf,
                                         std::span<const cplx> tk) {
  const int n = g.vertex_count();
  std::vector<cplx> out(n, cplx(0.0));
  for (int e = 0; e < es.edge_count(); ++e) {
    out[es.terminus[e]] += tk[e] / zf.zeta[e];
    out[es.origin[e]] += tk[e] / std::conj(zf.zeta[es.reversal[e]]);
  }
  return out;
}

// (U_m K)(x_0;x_m) = conj(zeta_{x_1}(x_0)) zeta_{x_{m-1}}(x_m) K(x_0;x_m).
inline std::vector<cplx> apply_u_m(const Graph& g, const OrientedEdgeSet& es,
                                   const ZetaField& zf, const PathTable& table,
                                   std::span<const cplx> k_fn) {
  const int m = table.k();
  std::vector<cplx> out(table.size());
  for (int i = 0; i < table.size(); ++i) {
    const auto& vs = table.path(i).vertices;
    const cplx z_first = zf.zeta[es.index_of(g, vs[1], vs[0])];
    const cplx z_last = zf.zeta[es.index_of(g, vs[m - 1], vs[m])];
    out[i] = std::conj(z_first) * z_last * k_fn[i];
  }
  return out;
}

// (O_m K)(x_0;x_{m-1}) = sum_{x_{-1}} conj(zeta_{x_0}(x_{-1})) K(x_{-1};x_{m-1})
//                      + sum_{x_m} K(x_0;x_m) zeta_{x_{m-1}}(x_m).
inline std::vector<cplx> apply_o_m(const Graph& g, const OrientedEdgeSet& es,
                                   const ZetaField& zf, const PathTable& table_m,
                                   std::span<const cplx> k_fn,
                                   const PathTable& table_out) {
  const int m = table_m.k();
  if (table_out.k() != m - 1) throw Error("O_m maps H_m to H_{m-1}");
  std::vector<cplx> out(table_out.size(), cplx(0.0));
  for (int i = 0; i < table_m.size(); ++i) {
    const auto& vs = table_m.path(i).vertices;
    const int suffix = table_out.index_of(
        std::span<const int>(vs.data() + 1, vs.size() - 1));
    const int prefix = table_out.index_of(
        std::span<const int>(vs.data(), vs.size() - 1));
    out[suffix] +=
        std::conj(zf.zeta[es.index_of(g, vs[1], vs[0])]) * k_fn[i];
    out[prefix] += k_fn[i] * zf.zeta[es.index_of(g, vs[m - 1], vs[m])];
  }
  return out;
}

// (P_m K)(x_1;x_{m-1}) = sum conj(zeta_{x_1}(x_0)) K(x_0;x_m)
//                        zeta_{x_{m-1}}(x_m) over both extensions.
inline std::vector<cplx> apply_p_m(const Graph& g, const OrientedEdgeSet& es,
                                   const ZetaField& zf, const PathTable& table_m,
                                   std::span<const cplx> k_fn,
                                   const PathTable& table_out) {
  const int m = table_m.k();
  if (m < 2 || table_out.k() != m - 2) throw Error("P_m maps H_m to H_{m-2}");
  std::vector<cplx> out(table_out.size(), cplx(0.0));
  for (int i = 0; i < table_m.size(); ++i) {
    const auto& vs = table_m.path(i).vertices;
    const int mid = table_out.index_of(
        std::span<const int>(vs.data() + 1, vs.size() - 2));
    out[mid] += std::conj(zf.zeta[es.index_of(g, vs[1], vs[0])]) * k_fn[i] *
                zf.zeta[es.index_of(g, vs[m - 1], vs[m])];
  }
  return out;
}

// (Y_gamma K)(x) = (d(x)/N_gamma(x)) <N_gamma K>_U / <d>_U.
inline std::vector<cplx> apply_y(const Graph& g, const ZetaField& zf,
                                 std::span<const cplx> k_fn) {
  const int n = g.vertex_count();
  cplx num = 0.0;
  double den = 0.0;
  for (int x = 0; x < n; ++x) {
    num += zf.n_gamma[x] * k_fn[x];
    den += g.degree(x);
  }
  const cplx ratio = num / den;
  std::vector<cplx> out(n);
  for (int x = 0; x < n; ++x) out[x] = g.degree(x) / zf.n_gamma[x] * ratio;
  return out;
}

// ---------------------------------------------------------------------------
// Pairings used by the identity suite.

// <f1, K_B f2> for K in H_1 with dense edge values.
inline cplx kb1_pair(const OrientedEdgeSet& es, std::span<const cplx> k_fn,
                     std::span<const cplx> f1, std::span<const cplx> f2) {
  cplx acc = 0.0;
  for (int e = 0; e < es.edge_count(); ++e)
    acc += std::conj(f1[e]) * k_fn[e] * f2[e];
  return acc;
}

// <f1, K_B f2> for dense K over B_m, m >= 1.
inline cplx kb_pair(const Graph& g, const OrientedEdgeSet& es,
                    const PathTable& table, std::span<const cplx> k_fn,
                    std::span<const cplx> f1, std::span<const cplx> f2) {
  const int m = table.k();
  cplx acc = 0.0;
  for (int i = 0; i < table.size(); ++i) {
    const auto& vs = table.path(i).vertices;
    const int e_first = es.index_of(g, vs[0], vs[1]);
    const int e_last = es.index_of(g, vs[m - 1], vs[m]);
    acc += std::conj(f1[e_first]) * k_fn[i] * f2[e_last];
  }
  return acc;
}

// <psi, K_G psi> for dense K over B_m (m = 0 means vertex functions).
inline cplx kg_pair(const Graph& g, const PathTable& table,
                    std::span<const cplx> k_fn, const Eigen::VectorXd& psi) {
  cplx acc = 0.0;
  if (table.k() == 0) {
    for (int x = 0; x < g.vertex_count(); ++x)
      acc += psi(x) * k_fn[x] * psi(x);
    return acc;
  }
  for (int i = 0; i < table.size(); ++i) {
    const auto& vs = table.path(i).vertices;
    acc += psi(vs.front()) * k_fn[i] * psi(vs.back());
  }
  return acc;
}

// <K>_gamma for dense K over B_m.
inline cplx wavg_pair(const Graph& g, const OrientedEdgeSet& es,
                      const ZetaField& zf, const PathTable& table,
                      std::span<const cplx> k_fn) {
  double denom = 0.0;
  for (const double v : zf.n_gamma) denom += v;
  cplx acc = 0.0;
  if (table.k() == 0) {
    for (int x = 0; x < g.vertex_count(); ++x)
      acc += k_fn[x] * zf.n_gamma[x];
    return acc / denom;
  }
  for (int i = 0; i < table.size(); ++i)
    acc += k_fn[i] * tree_green(g, es, zf, table.path(i)).imag();
  return acc / denom;
}

// ---------------------------------------------------------------------------
// The full battery of exact relations behind Propositions on the way back to
// the original eigenfunctions, evaluated on randomized operands.

struct Step5SuiteOptions {
  int T = 3;
  std::vector<int> m_values = {2, 3};
  int eigen_samples = 4;    // how many j to test
  int operand_samples = 2;  // random J/K draws per j
  std::uint64_t seed = 1;
  double denom_tol = kDegenerateDenominatorTol;
};

struct Step5IdentityReport {
  double pasinitial = 0.0;
  double telescoping = 0.0;
  double passuperieur_t = 0.0;
  double passuperieur_t_tilde = 0.0;
  double passuperieur_higher = 0.0;  // max over requested m >= 2
  double check_o1 = 0.0;
  double check_o1_tilde = 0.0;
  double gammav = 0.0;
  int degenerate_skips = 0;  // j-samples skipped due to flagged T denominators

  double max() const {
    return std::max({pasinitial, telescoping, passuperieur_t,
                     passuperieur_t_tilde, passuperieur_higher, check_o1,
                     check_o1_tilde, gammav});
  }
};

inline Step5IdentityReport step5_identity_suite(
    const Graph& g, const OrientedEdgeSet& es, const EigenSystem& spec,
    ZetaPolicy& policy, double eta0, const Step5SuiteOptions& opts = {}) {
  Step5IdentityReport rep;
  const int n = g.vertex_count();
  const int b = es.edge_count();
  SplitMix64 rng = derive_stream(opts.seed, "step5-operands");
  auto random_value = [&rng]() {
    return cplx(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0) /
           std::sqrt(2.0);
  };

  const PathTable table0(g, 0);
  const PathTable table1(g, 1);
  int max_m = 1;
  for (const int m : opts.m_values) max_m = std::max(max_m, m);
  std::vector<PathTable> tables;  // tables[m] holds B_m
  tables.reserve(max_m + 1);
  for (int m = 0; m <= max_m; ++m) tables.emplace_back(g, m);

  const int stride = std::max(1, spec.size() / opts.eigen_samples);
  for (int j = 0; j < spec.size(); j += stride) {
    const cplx gamma(spec.lambda(j), eta0);
    const ZetaField& zf = policy.solve(gamma);
    const QuasiEigenvectors qv = make_quasi_eigenvectors(g, es, zf, spec, j);
    const Eigen::VectorXd psi = spec.eigenvectors.col(j);

    for (int t = 0; t < opts.operand_samples; ++t) {
      // --- pasinitial, on a random J in H_0 ---
      std::vector<cplx> j_fn(n);
      for (auto& v : j_fn) v = random_value();

      const std::vector<cplx> lj = apply_l(g, es, zf, j_fn, false);
      const std::vector<cplx> ltj = apply_l(g, es, zf, j_fn, true);
      const cplx lhs = kb1_pair(es, lj, qv.f_star, qv.f) -
                       kb1_pair(es, ltj, qv.g_star, qv.g);

      std::vector<cplx> dj(n);
      for (int x = 0; x < n; ++x)
        dj[x] = static_cast<double>(g.degree(x)) * j_fn[x];
      const std::vector<cplx> pdj = apply_p_gamma(g, zf, dj);
      std::vector<cplx> resolvent(n);
      for (int x = 0; x < n; ++x) resolvent[x] = dj[x] - pdj[x];
      const cplx rhs = cplx(0.0, 2.0) * kg_pair(g, table0, resolvent, psi);
      rep.pasinitial = std::max(rep.pasinitial, std::abs(lhs - rhs));

      // --- telescoping J = (I - P_gamma) S_T J + S~_T J ---
      const std::vector<cplx> stj = apply_s_t(g, zf, opts.T, j_fn);
      const std::vector<cplx> pstj = apply_p_gamma(g, zf, stj);
      const std::vector<cplx> sttj = apply_s_t_tilde(g, zf, opts.T, j_fn);
      for (int x = 0; x < n; ++x)
        rep.telescoping =
            std::max(rep.telescoping,
                     std::abs(j_fn[x] - (stj[x] - pstj[x]) - sttj[x]));

      // --- passuperieur m = 1, both variants, plus average preservation ---
      std::vector<cplx> k1(b);
      for (auto& v : k1) v = random_value();

      const EdgeOpResult tk = apply_t(g, es, zf, k1, opts.denom_tol);
      if (tk.clean()) {
        const std::vector<cplx> o1 = apply_o1_from_t(g, es, zf, tk.values);
        const cplx lhs1 = kb1_pair(es, tk.values, qv.f_star, qv.f);
        const cplx rhs1 =
            kg_pair(g, table1, k1, psi) - kg_pair(g, table0, o1, psi);
        rep.passuperieur_t = std::max(rep.passuperieur_t, std::abs(lhs1 - rhs1));
        rep.check_o1 = std::max(
            rep.check_o1, std::abs(wavg_pair(g, es, zf, table0, o1) -
                                   wavg_pair(g, es, zf, table1, k1)));
      } else {
        ++rep.degenerate_skips;
      }

      const EdgeOpResult ttk = apply_t_tilde(g, es, zf, k1, opts.denom_tol);
      if (ttk.clean()) {
        const std::vector<cplx> o1t = apply_o1_from_t(g, es, zf, ttk.values);
        const cplx lhs1 = kb1_pair(es, ttk.values, qv.f_star, qv.f);
        const cplx rhs1 =
            kg_pair(g, table1, k1, psi) - kg_pair(g, table0, o1t, psi);
        rep.passuperieur_t_tilde =
            std::max(rep.passuperieur_t_tilde, std::abs(lhs1 - rhs1));
        rep.check_o1_tilde = std::max(
            rep.check_o1_tilde, std::abs(wavg_pair(g, es, zf, table0, o1t) -
                                         wavg_pair(g, es, zf, table1, k1)));
      } else {
        ++rep.degenerate_skips;
      }

      // --- passuperieur m >= 2 and the average identity ---
      for (const int m : opts.m_values) {
        if (m < 2) continue;
        const PathTable& tm = tables[m];
        std::vector<cplx> km(tm.size());
        for (auto& v : km) v = random_value();

        const std::vector<cplx> um = apply_u_m(g, es, zf, tm, km);
        const std::vector<cplx> om =
            apply_o_m(g, es, zf, tm, km, tables[m - 1]);
        const std::vector<cplx> pm =
            apply_p_m(g, es, zf, tm, km, tables[m - 2]);

        const cplx lhsm = kb_pair(g, es, tm, um, qv.f_star, qv.f);
        const cplx rhsm = kg_pair(g, tm, km, psi) -
                          kg_pair(g, tables[m - 1], om, psi) +
                          kg_pair(g, tables[m - 2], pm, psi);
        rep.passuperieur_higher =
            std::max(rep.passuperieur_higher, std::abs(lhsm - rhsm));

        const cplx avg_k = wavg_pair(g, es, zf, tm, km);
        const cplx avg_om = wavg_pair(g, es, zf, tables[m - 1], om);
        const cplx avg_pm = wavg_pair(g, es, zf, tables[m - 2], pm);
        rep.gammav =
            std::max(rep.gammav, std::abs(avg_k - (avg_om - avg_pm)));
      }
    }
  }
  return rep;
}

}  // namespace qergo

#endif  // QERGO_STEP5_HPP
