#ifndef QERGO_SPECTRAL_HPP
#define QERGO_SPECTRAL_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "qergo/ensembles.hpp"
#include "qergo/errors.hpp"
#include "qergo/graph.hpp"

namespace qergo {

using cplx = std::complex<double>;

constexpr int kDefaultEigensolveSizeCap = 5000;
constexpr double kDefaultResidualTol = 1e-10;

// Real orthonormal eigenpairs of H = A + W, eigenvalues ascending.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // column j is psi_j
  double residual_tol = kDefaultResidualTol;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double lambda(int j) const { return eigenvalues(j); }
  double psi(int j, int x) const { return eigenvectors(x, j); }
};

inline Eigen::MatrixXd hamiltonian_matrix(const Graph& g, const Potential& w) {
  const int n = g.vertex_count();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    for (const int v : g.neighbors(u)) h(u, v) = 1.0;
    h(u, u) = w.values[u];
  }
  return h;
}

// (Pf)(x) = (1/d(x)) sum_{y ~ x} f(y); self-adjoint on l^2(V, d).
inline Eigen::MatrixXd laplacian_matrix(const Graph& g) {
  const int n = g.vertex_count();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u)
    for (const int v : g.neighbors(u)) p(u, v) = 1.0 / g.degree(u);
  return p;
}

inline EigenSystem eigensystem(const Graph& g, const Potential& w,
                               double tol = kDefaultResidualTol,
                               int size_cap = kDefaultEigensolveSizeCap) {
  const int n = g.vertex_count();
  if (n > size_cap)
    throw SizeCapExceededError("N = " + std::to_string(n) +
                               " exceeds the dense-solve cap of " +
                               std::to_string(size_cap));
  const Eigen::MatrixXd h = hamiltonian_matrix(g, w);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw EigensolveFailureError("dense symmetric eigensolve did not converge");

  EigenSystem es;
  es.eigenvalues = solver.eigenvalues();
  es.eigenvectors = solver.eigenvectors();
  es.residual_tol = tol;

  const double scale = std::max(1.0, h.cwiseAbs().rowwise().sum().maxCoeff());
  const double residual =
      (h * es.eigenvectors - es.eigenvectors * es.eigenvalues.asDiagonal())
          .cwiseAbs()
          .maxCoeff();
  if (residual > tol * scale)
    throw EigensolveFailureError("eigenpair residual " +
                                 std::to_string(residual) + " above tolerance");
  const double gram_err =
      (es.eigenvectors.transpose() * es.eigenvectors -
       Eigen::MatrixXd::Identity(n, n))
          .cwiseAbs()
          .maxCoeff();
  if (gram_err > tol * std::max(1.0, static_cast<double>(n)))
    throw EigensolveFailureError("eigenbasis lost orthonormality");

  // all eigenvalues live in I_0 = [-(A + D), A + D]
  double a_bound = w.bound;
  for (const double v : w.values) a_bound = std::max(a_bound, std::abs(v));
  const double i0 = a_bound + g.max_degree();
  if (es.eigenvalues(0) < -i0 - tol * scale ||
      es.eigenvalues(n - 1) > i0 + tol * scale)
    throw EigensolveFailureError("spectrum escaped I_0");
  return es;
}

// Green function of H on the finite graph, g^z(x,y) = sum_j psi_j(x)psi_j(y)
// / (lambda_j - z).
inline cplx finite_green(const EigenSystem& es, int x, int y, cplx z) {
  if (z.imag() == 0.0)
    throw RealAxisParameterError("finite_green needs Im z != 0");
  cplx acc = 0.0;
  for (int j = 0; j < es.size(); ++j)
    acc += es.psi(j, x) * es.psi(j, y) / (es.lambda(j) - z);
  return acc;
}

// Versioned binary dump of (lambda, Psi), for caching between CLI stages.
inline void save_eigensystem(const EigenSystem& es, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  const char magic[8] = {'Q', 'E', 'R', 'G', 'E', 'I', 'G', '1'};
  os.write(magic, sizeof(magic));
  const std::int64_t n = es.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  os.write(reinterpret_cast<const char*>(&es.residual_tol),
           sizeof(es.residual_tol));
  os.write(reinterpret_cast<const char*>(es.eigenvalues.data()),
           static_cast<std::streamsize>(sizeof(double) * n));
  os.write(reinterpret_cast<const char*>(es.eigenvectors.data()),
           static_cast<std::streamsize>(sizeof(double) * n * n));
  if (!os) throw Error("short write to " + path);
}

inline EigenSystem load_eigensystem(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, "QERGEIG1", 8) != 0)
    throw Error(path + ": not a QERGEIG1 dump");
  std::int64_t n = 0;
  EigenSystem es;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  is.read(reinterpret_cast<char*>(&es.residual_tol), sizeof(es.residual_tol));
  es.eigenvalues.resize(n);
  es.eigenvectors.resize(n, n);
  is.read(reinterpret_cast<char*>(es.eigenvalues.data()),
          static_cast<std::streamsize>(sizeof(double) * n));
  is.read(reinterpret_cast<char*>(es.eigenvectors.data()),
          static_cast<std::streamsize>(sizeof(double) * n * n));
  if (!is) throw Error(path + ": truncated dump");
  return es;
}

}  // namespace qergo

#endif  // QERGO_SPECTRAL_HPP
