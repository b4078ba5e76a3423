#pragma once

#include <Eigen/Dense>

#include "dsdr/slicing.hpp"

namespace dsdr {

enum class Method { Sir, Save, Dr };
enum class KernelScale { CenteredX, StandardizedZ };

const char* method_name(Method m);

struct KernelMatrix {
  MatrixXd v;  // p x p, symmetric
  Method method = Method::Sir;
  KernelScale scale = KernelScale::CenteredX;
};

// Weighted between-slice covariance of slice means: sum_h p_h m_h m_h^T with
// m_h = sums_h / n_h, p_h = n_h / n. Empty slices are skipped.
KernelMatrix sir_kernel(const SliceStats& stats, long long n);

// sum_h p_h (sigma - S_h)^2 where S_h is the within-slice covariance of the
// centered predictors (divisor n_h; zero for singleton slices).
KernelMatrix save_kernel(const Dataset& data, const VectorXd& center, const SliceSpec& spec,
                         const MatrixXd& sigma);

// The four-term second-moment contrast on standardized predictors:
//   2 sum_h p_h A_h^2 + 2 M^2 + 2 tr(M) M - 2 I
// with A_h the within-slice second moment and M = sum_h p_h mu_h mu_h^T.
// check_standardized guards against unstandardized input (mean within 1e-6,
// covariance within 1e-3 of I); the protocol's globally-centered path passes
// false because its input is deliberately off-center.
KernelMatrix dr_kernel(const MatrixXd& z, const SliceSpec& spec, const VectorXd& yvals,
                       bool check_standardized = true);

}  // namespace dsdr
