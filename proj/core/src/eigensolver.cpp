#include "kacl/eigensolver.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "kacl/errors.hpp"
#include "kacl/rng.hpp"

namespace kl {

double Spectrum::lambda(std::size_t i) const {
  if (empty_domain || i >= eigenvalues.size())
    return std::numeric_limits<double>::infinity();
  return eigenvalues[i];
}

Spectrum infinite_spectrum(double h, int d) {
  Spectrum s;
  s.empty_domain = true;
  s.h = h;
  s.d = d;
  return s;
}

namespace {

// Orthonormalize columns; drops near-dependent directions.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& S) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S);
  qr.setThreshold(1e-12);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(S.rows(), r);
  return Q;
}

void finalize(Spectrum& spec, const Eigen::MatrixXd& vecs,
              const std::vector<double>& vals, double h, int d) {
  spec.h = h;
  spec.d = d;
  spec.eigenvalues = vals;
  spec.vectors = vecs;
  // Scale to h^d-weighted orthonormality and fix signs.
  const double w = std::pow(h, -0.5 * d);
  spec.vectors *= w;
  for (Eigen::Index j = 0; j < spec.vectors.cols(); ++j) {
    Eigen::Index imax = 0;
    spec.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (spec.vectors(imax, j) < 0.0) spec.vectors.col(j) *= -1.0;
  }
}

}  // namespace

Spectrum smallest_eigenpairs(const SparseOperator& op, int k,
                             const SolveOptions& opts) {
  if (k < 1) throw invalid_parameter("smallest_eigenpairs: k must be >= 1");
  if (!(opts.tol > 0.0))
    throw invalid_parameter("smallest_eigenpairs: tol must be > 0");
  const std::int64_t n = op.n();
  if (n == 0) return infinite_spectrum(op.h, op.d);

  Spectrum spec;
  if (k > n) {
    spec.k_clamped = true;
    k = static_cast<int>(n);
  }
  const int block = static_cast<int>(std::min<std::int64_t>(n, k + 2));

  // Block spans the whole space: a single Rayleigh-Ritz is exact.
  if (block == n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(op.mat));
    std::vector<double> vals(es.eigenvalues().data(),
                             es.eigenvalues().data() + k);
    finalize(spec, es.eigenvectors().leftCols(k), vals, op.h, op.d);
    spec.residuals.assign(k, 0.0);
    for (int j = 0; j < k; ++j)
      spec.residuals[j] = (op.mat * es.eigenvectors().col(j) -
                           vals[j] * es.eigenvectors().col(j))
                              .norm();
    spec.iterations = 1;
    return spec;
  }

  // LOBPCG with A^{-1} as preconditioner (A is positive definite).
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(op.mat);
  if (ldlt.info() != Eigen::Success)
    throw convergence_failure("smallest_eigenpairs: factorization failed");

  Rng rng = Rng::keyed(opts.seed, 0xE16E);
  Eigen::MatrixXd X(n, block);
  for (std::int64_t i = 0; i < n; ++i)
    for (int j = 0; j < block; ++j) X(i, j) = rng.normal();
  X = orthonormalize(X);
  Eigen::MatrixXd P(n, 0);

  Eigen::VectorXd theta(block);
  Eigen::MatrixXd R;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iterations; ++it) {
    Eigen::MatrixXd AX = op.mat * X;
    Eigen::MatrixXd H = X.transpose() * AX;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(H);
    X = X * small.eigenvectors();
    AX = AX * small.eigenvectors();
    theta = small.eigenvalues();

    R = AX - X * theta.asDiagonal();
    converged = true;
    for (int j = 0; j < k; ++j) {
      if (R.col(j).norm() > opts.tol * std::max(std::fabs(theta[j]), 1e-300)) {
        converged = false;
        break;
      }
    }
    if (converged) break;

    Eigen::MatrixXd W = ldlt.solve(R);
    Eigen::MatrixXd S(n, X.cols() + W.cols() + P.cols());
    S << X, W, P;
    // Project out the current X from the new directions via full re-ortho.
    Eigen::MatrixXd Q = orthonormalize(S);
    Eigen::MatrixXd G = Q.transpose() * (op.mat * Q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(G);
    const int take = static_cast<int>(std::min<Eigen::Index>(block, Q.cols()));
    Eigen::MatrixXd Xn = Q * rr.eigenvectors().leftCols(take);
    P = Xn - X * (X.transpose() * Xn);
    P = orthonormalize(P);
    if (P.cols() > block) P = P.leftCols(block);
    X = Xn;
  }

  std::vector<double> vals(theta.data(), theta.data() + k);
  std::vector<double> res(k);
  for (int j = 0; j < k; ++j) res[j] = R.col(j).norm();
  if (!converged) {
    Spectrum partial;
    partial.k_clamped = spec.k_clamped;
    finalize(partial, X.leftCols(k), vals, op.h, op.d);
    partial.residuals = res;
    partial.iterations = it;
    throw convergence_failure("smallest_eigenpairs: iteration budget exhausted");
  }
  spec.iterations = it + 1;
  finalize(spec, X.leftCols(k), vals, op.h, op.d);
  spec.residuals = res;
  return spec;
}

std::vector<double> dense_oracle_eigs(const SparseOperator& op, int k,
                                      std::int64_t size_guard) {
  if (op.n() > size_guard)
    throw invalid_parameter("dense_oracle_eigs: size guard exceeded");
  if (op.n() == 0) throw empty_domain_error("dense_oracle_eigs: empty domain");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      Eigen::MatrixXd(op.mat), Eigen::EigenvaluesOnly);
  const int m = static_cast<int>(std::min<std::int64_t>(k, op.n()));
  return {es.eigenvalues().data(), es.eigenvalues().data() + m};
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spec) {
  os << "index,eigenvalue,residual\n";
  char buf[64];
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", spec.eigenvalues[i]);
    os << (i + 1) << "," << buf << ",";
    std::snprintf(buf, sizeof buf, "%.17g",
                  i < spec.residuals.size() ? spec.residuals[i] : 0.0);
    os << buf << "\n";
  }
  if (spec.empty_domain) os << "1,inf,0\n";
}

}  // namespace kl
