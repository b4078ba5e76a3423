#include "dsdr/estimate.hpp"

#include <iostream>

namespace dsdr {

const char* mode_name(EstimateMode m) {
  switch (m) {
    case EstimateMode::Global: return "global";
    case EstimateMode::ExactDistributed: return "exact";
    case EstimateMode::ApproxDistributed: return "approx";
  }
  return "?";
}

void normalize_directions(MatrixXd& beta) {
  for (Eigen::Index c = 0; c < beta.cols(); ++c) {
    const double norm = beta.col(c).norm();
    if (norm > 0.0) beta.col(c) /= norm;
  }
  canonicalize_signs(beta);
}

MatrixXd sir_directions(const MatrixXd& eta, const MatrixXd& sigma) {
  MatrixXd w = inverse_sqrt_auto(sigma);
  MatrixXd beta = w * (w * eta);
  normalize_directions(beta);
  return beta;
}

GlobalFit fit_global_detail(const Dataset& data, Method method, int slices, int k,
                            SliceStrategy strategy) {
  data.validate();
  const auto n = data.n(), p = data.p();
  if (slices < 2) throw InvalidSliceCount();
  if (k < 1 || k > p) throw Error("fit_global: K must satisfy 1 <= K <= p");
  if (n <= p)
    std::cerr << "dsdr: warning: n <= p (" << n << " <= " << p
              << "), estimates may be unstable\n";

  GlobalFit fit;
  fit.spec = strategy == SliceStrategy::EqualWidth
                 ? make_slice_grid(data.y.minCoeff(), data.y.maxCoeff(), slices)
                 : make_quantile_grid(data.y, slices);
  fit.mean = data.x.colwise().mean();

  SdrEstimate est;
  est.method = method;
  est.mode = EstimateMode::Global;
  est.params.slices = slices;
  est.params.k = k;

  if (method == Method::Sir) {
    SliceStats stats = slice_statistics(data, fit.mean, fit.spec);
    KernelMatrix kern = sir_kernel(stats, stats.n);
    fit.sigma = stats.scatter / static_cast<double>(n - 1);
    EigenPair top = top_k_eigen(kern.v, k);
    est.beta = sir_directions(top.vectors, fit.sigma);
    est.eigenvalues = top.values;
    fit.kernel = std::move(kern.v);
  } else {
    Whitened wh = whiten(data);
    fit.sigma = sample_covariance(data.x);
    KernelMatrix kern =
        method == Method::Save
            ? save_kernel({wh.z, data.y}, VectorXd::Zero(p), fit.spec, MatrixXd::Identity(p, p))
            : dr_kernel(wh.z, fit.spec, data.y);
    EigenPair top = top_k_eigen(kern.v, k);
    est.beta = wh.w * top.vectors;
    normalize_directions(est.beta);
    est.eigenvalues = top.values;
    fit.kernel = std::move(kern.v);
  }
  fit.estimate = std::move(est);
  return fit;
}

SdrEstimate fit_global(const Dataset& data, Method method, int slices, int k,
                       SliceStrategy strategy) {
  return fit_global_detail(data, method, slices, k, strategy).estimate;
}

}  // namespace dsdr
