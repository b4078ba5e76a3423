#pragma once

#include <cstdint>
#include <vector>

#include "dsdr/dataset.hpp"

namespace dsdr {

// Trace correlation r(K) = Tr(P_B P_Bhat) / K in [0,1]; invariant under
// right-multiplication of either argument by an invertible K x K matrix.
double trace_correlation(const MatrixXd& b_true, const MatrixXd& b_hat);

// Squared multiple correlation of one estimated direction against a subspace,
// in the Sigma inner product, computed in closed form via the
// Sigma-orthogonal projection.
double r_squared(const VectorXd& beta_hat, const MatrixXd& b_true, const MatrixXd& sigma);

struct MetricRecord {
  int repetition = 0;
  double trace_correlation = 0.0;
  double r_squared = 0.0;
  std::vector<double> r_squared_columns;
  double wall_time_seconds = 0.0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  bool failed = false;
  std::string error;
};

struct MetricSummary {
  double trace_correlation_mean = 0.0, trace_correlation_std = 0.0;
  double r_squared_mean = 0.0, r_squared_std = 0.0;
  double wall_time_mean = 0.0, wall_time_std = 0.0;
  double bytes_up_mean = 0.0, bytes_up_std = 0.0;
  double bytes_down_mean = 0.0, bytes_down_std = 0.0;
  int count = 0;  // successful repetitions aggregated
};

// Mean and sample standard deviation (divisor R-1) per metric field over the
// successful records. Throws InsufficientRepetitions below 2 records.
MetricSummary aggregate(const std::vector<MetricRecord>& records);

}  // namespace dsdr
