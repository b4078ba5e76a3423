#pragma once

#include <Eigen/Dense>

#include "dsdr/dataset.hpp"

namespace dsdr {

// Leading eigenpairs of a symmetric matrix: values descending, vectors
// orthonormal with the canonical sign (largest-magnitude entry positive,
// ties broken by lowest index).
struct EigenPair {
  VectorXd values;   // m, non-increasing
  MatrixXd vectors;  // p x m, orthonormal columns
};

// Flips each column so its largest-magnitude entry is positive.
void canonicalize_signs(MatrixXd& vectors);

// Top-k eigenpairs of a symmetric p x p matrix. The input is symmetrized as
// (M + M^T)/2 before solving; asymmetry beyond 1e-10 relative throws
// NonSymmetric, solver failure throws ConvergenceFailure.
EigenPair top_k_eigen(const MatrixXd& m, int k);

// W = Q diag((lambda_i + ridge)^(-1/2)) Q^T from the eigendecomposition of a
// symmetric PSD matrix. With ridge = 0 a numerically singular input
// (lambda_min <= 1e-12 lambda_max) throws SingularCovariance.
MatrixXd inverse_sqrt(const MatrixXd& sigma, double ridge);

// inverse_sqrt with the default ridge policy: ridge = 1e-8 * trace / p when
// lambda_min <= 1e-12 * lambda_max, otherwise 0.
MatrixXd inverse_sqrt_auto(const MatrixXd& sigma);

// Symmetric PSD square root (negative eigenvalues clamped to zero).
MatrixXd sqrt_psd(const MatrixXd& sigma);

struct Whitened {
  MatrixXd z;     // n x p, centered and whitened rows
  VectorXd mean;  // p
  MatrixXd w;     // p x p, the inverse square root applied
};

// z = (x - mean) * W with W = inverse_sqrt_auto of the sample covariance
// (divisor n-1). Requires n >= 2.
Whitened whiten(const Dataset& data);

// Sample covariance about the column mean, divisor n-1.
MatrixXd sample_covariance(const MatrixXd& x);

}  // namespace dsdr
