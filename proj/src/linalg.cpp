#include "dsdr/linalg.hpp"

#include <cmath>

namespace dsdr {

void canonicalize_signs(MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > best_abs) {  // strict: ties keep the lowest index
        best_abs = a;
        best = r;
      }
    }
    if (vectors(best, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

namespace {

Eigen::SelfAdjointEigenSolver<MatrixXd> solve_symmetric(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("eigendecomposition needs a square matrix");
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-10 * (1.0 + m.norm())) throw NonSymmetric();
  MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure();
  return solver;
}

}  // namespace

EigenPair top_k_eigen(const MatrixXd& m, int k) {
  const auto p = m.rows();
  if (k < 1 || k > p) throw Error("top_k_eigen: k must satisfy 1 <= k <= p");
  auto solver = solve_symmetric(m);

  // Eigen returns ascending order; take the top k reversed.
  EigenPair out;
  out.values.resize(k);
  out.vectors.resize(p, k);
  for (int j = 0; j < k; ++j) {
    out.values(j) = solver.eigenvalues()(p - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(p - 1 - j);
  }
  canonicalize_signs(out.vectors);
  return out;
}

MatrixXd inverse_sqrt(const MatrixXd& sigma, double ridge) {
  auto solver = solve_symmetric(sigma);
  const VectorXd& lam = solver.eigenvalues();
  const double lmax = lam.maxCoeff();
  const double trace = lam.sum();
  if (lam.minCoeff() < -1e-10 * std::max(trace, 0.0) - 1e-300)
    throw Error("inverse_sqrt: matrix is not positive semidefinite");
  if (ridge == 0.0 && lam.minCoeff() <= 1e-12 * std::max(lmax, 0.0)) throw SingularCovariance();

  VectorXd inv = lam;
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    const double v = std::max(lam(i), 0.0) + ridge;
    inv(i) = 1.0 / std::sqrt(v);
  }
  return solver.eigenvectors() * inv.asDiagonal() * solver.eigenvectors().transpose();
}

MatrixXd inverse_sqrt_auto(const MatrixXd& sigma) {
  auto solver = solve_symmetric(sigma);
  const VectorXd& lam = solver.eigenvalues();
  const double lmax = std::max(lam.maxCoeff(), 0.0);
  double ridge = 0.0;
  if (lam.minCoeff() <= 1e-12 * lmax)
    ridge = 1e-8 * std::max(lam.sum(), 0.0) / static_cast<double>(sigma.rows());
  if (ridge == 0.0 && lam.minCoeff() <= 0.0) throw SingularCovariance();
  VectorXd inv = lam;
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    double v = std::max(lam(i), 0.0) + ridge;
    if (v <= 0.0) throw SingularCovariance();
    inv(i) = 1.0 / std::sqrt(v);
  }
  return solver.eigenvectors() * inv.asDiagonal() * solver.eigenvectors().transpose();
}

MatrixXd sqrt_psd(const MatrixXd& sigma) {
  auto solver = solve_symmetric(sigma);
  VectorXd s = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * s.asDiagonal() * solver.eigenvectors().transpose();
}

MatrixXd sample_covariance(const MatrixXd& x) {
  const auto n = x.rows();
  if (n < 2) throw Error("sample covariance needs n >= 2");
  Eigen::RowVectorXd mean = x.colwise().mean();
  MatrixXd u = x.rowwise() - mean;
  return (u.transpose() * u) / static_cast<double>(n - 1);
}

Whitened whiten(const Dataset& data) {
  data.validate();
  if (data.n() < 2) throw Error("whiten needs n >= 2");
  Whitened out;
  out.mean = data.x.colwise().mean();
  MatrixXd u = data.x.rowwise() - out.mean.transpose();
  MatrixXd sigma = (u.transpose() * u) / static_cast<double>(data.n() - 1);
  out.w = inverse_sqrt_auto(sigma);
  out.z = u * out.w;
  return out;
}

}  // namespace dsdr
