#include "dsdr/metrics.hpp"

#include <cmath>

#include "dsdr/errors.hpp"

namespace dsdr {

namespace {

constexpr double kSlack = 1e-10;

// Orthonormal basis of the column span; throws RankDeficient if the columns
// do not have full rank.
MatrixXd orthonormal_basis(const MatrixXd& a) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < a.cols()) throw RankDeficient();
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(a.rows(), a.cols());
  return q;
}

double clamp_metric(double v, const char* what) {
  if (v < -kSlack || v > 1.0 + kSlack)
    throw MetricOutOfRange(std::string(what) + " outside [0,1] beyond tolerance: " +
                           std::to_string(v));
  return std::min(std::max(v, 0.0), 1.0);
}

}  // namespace

double trace_correlation(const MatrixXd& b_true, const MatrixXd& b_hat) {
  if (b_true.rows() != b_hat.rows()) throw DimensionMismatch("trace_correlation: row counts");
  if (b_true.cols() != b_hat.cols())
    throw DimensionMismatch("trace_correlation: column counts must match");
  const auto k = b_true.cols();
  if (k < 1) throw Error("trace_correlation: need at least one column");
  MatrixXd qa = orthonormal_basis(b_true);
  MatrixXd qb = orthonormal_basis(b_hat);
  const double r = (qa.transpose() * qb).squaredNorm() / static_cast<double>(k);
  return clamp_metric(r, "trace correlation");
}

double r_squared(const VectorXd& beta_hat, const MatrixXd& b_true, const MatrixXd& sigma) {
  const auto p = beta_hat.size();
  if (b_true.rows() != p || sigma.rows() != p || sigma.cols() != p)
    throw DimensionMismatch("r_squared: dimensions");
  const double denom = beta_hat.dot(sigma * beta_hat);
  if (!(denom > 0.0)) throw SingularCovariance("r_squared: beta' Sigma beta is not positive");

  MatrixXd sb = sigma * b_true;                    // p x d
  MatrixXd gram = b_true.transpose() * sb;         // d x d
  Eigen::LDLT<MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) throw RankDeficient();
  VectorXd rhs = sb.transpose() * beta_hat;        // d
  const double num = rhs.dot(ldlt.solve(rhs));
  return clamp_metric(num / denom, "r_squared");
}

MetricSummary aggregate(const std::vector<MetricRecord>& records) {
  std::vector<const MetricRecord*> ok;
  for (const auto& r : records)
    if (!r.failed) ok.push_back(&r);
  if (ok.size() < 2) throw InsufficientRepetitions();

  auto stats = [&](auto field) {
    double mean = 0.0;
    for (auto* r : ok) mean += field(*r);
    mean /= static_cast<double>(ok.size());
    double ss = 0.0;
    for (auto* r : ok) {
      const double d = field(*r) - mean;
      ss += d * d;
    }
    return std::pair<double, double>{mean, std::sqrt(ss / static_cast<double>(ok.size() - 1))};
  };

  MetricSummary s;
  std::tie(s.trace_correlation_mean, s.trace_correlation_std) =
      stats([](const MetricRecord& r) { return r.trace_correlation; });
  std::tie(s.r_squared_mean, s.r_squared_std) =
      stats([](const MetricRecord& r) { return r.r_squared; });
  std::tie(s.wall_time_mean, s.wall_time_std) =
      stats([](const MetricRecord& r) { return r.wall_time_seconds; });
  std::tie(s.bytes_up_mean, s.bytes_up_std) =
      stats([](const MetricRecord& r) { return static_cast<double>(r.bytes_up); });
  std::tie(s.bytes_down_mean, s.bytes_down_std) =
      stats([](const MetricRecord& r) { return static_cast<double>(r.bytes_down); });
  s.count = static_cast<int>(ok.size());
  return s;
}

}  // namespace dsdr
