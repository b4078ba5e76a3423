#pragma once

#include <string>

#include "dsdr/kernels.hpp"
#include "dsdr/linalg.hpp"

namespace dsdr {

enum class EstimateMode { Global, ExactDistributed, ApproxDistributed };
enum class SliceStrategy { EqualWidth, EqualCount };

const char* mode_name(EstimateMode m);

struct EstimateParams {
  int slices = 10;
  int k = 1;
  double alpha = 0.0;  // 0 = fixed-k rule
  int workers = 1;
  std::string partition_tag;
};

// p x K direction matrix with its eigenvalue spectrum and provenance.
struct SdrEstimate {
  MatrixXd beta;       // p x K, unit-norm columns, canonical sign
  VectorXd eigenvalues;  // K, non-increasing
  Method method = Method::Sir;
  EstimateMode mode = EstimateMode::Global;
  EstimateParams params;
};

// Unit-normalizes each column and applies the canonical sign rule.
void normalize_directions(MatrixXd& beta);

// beta_k = Sigma^{-1} eta_k computed through the (ridge-stabilized) inverse
// square root applied twice, then unit-normalized. Shared by the global fit
// and the exact-distributed finalize so the two paths stay numerically
// identical.
MatrixXd sir_directions(const MatrixXd& eta, const MatrixXd& sigma);

struct GlobalFit {
  SdrEstimate estimate;
  MatrixXd kernel;  // the matrix the eigen step ran on
  MatrixXd sigma;   // sample covariance (divisor n-1)
  SliceSpec spec;
  VectorXd mean;
};

// Full-sample estimator. SIR follows the centered-X formulation (eigenvectors
// of the slice-mean kernel mapped through Sigma^{-1}); SAVE and DR run on the
// whitened scale and back-transform the selected eigenvectors by W.
GlobalFit fit_global_detail(const Dataset& data, Method method, int slices, int k,
                            SliceStrategy strategy = SliceStrategy::EqualWidth);
SdrEstimate fit_global(const Dataset& data, Method method, int slices, int k,
                       SliceStrategy strategy = SliceStrategy::EqualWidth);

}  // namespace dsdr
