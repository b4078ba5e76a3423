#include "dsdr/kernels.hpp"

#include <vector>

#include "dsdr/linalg.hpp"

namespace dsdr {

const char* method_name(Method m) {
  switch (m) {
    case Method::Sir: return "sir";
    case Method::Save: return "save";
    case Method::Dr: return "dr";
  }
  return "?";
}

KernelMatrix sir_kernel(const SliceStats& stats, long long n) {
  if (n < 1) throw Error("sir_kernel: n must be >= 1");
  const auto p = stats.sums.cols();
  const int H = static_cast<int>(stats.counts.size());
  MatrixXd v = MatrixXd::Zero(p, p);
  for (int h = 0; h < H; ++h) {
    const long long nh = stats.counts(h);
    if (nh == 0) continue;
    VectorXd m = stats.sums.row(h).transpose() / static_cast<double>(nh);
    const double ph = static_cast<double>(nh) / static_cast<double>(n);
    v.noalias() += ph * (m * m.transpose());
  }
  return {std::move(v), Method::Sir, KernelScale::CenteredX};
}

namespace {

// Per-slice index lists, one pass over the data.
std::vector<std::vector<Eigen::Index>> slice_members(const VectorXd& y, const SliceSpec& spec) {
  std::vector<std::vector<Eigen::Index>> idx(static_cast<std::size_t>(spec.slice_count()));
  for (Eigen::Index i = 0; i < y.size(); ++i)
    idx[static_cast<std::size_t>(assign_slice(y(i), spec) - 1)].push_back(i);
  return idx;
}

}  // namespace

KernelMatrix save_kernel(const Dataset& data, const VectorXd& center, const SliceSpec& spec,
                         const MatrixXd& sigma) {
  data.validate();
  spec.validate();
  const auto n = data.n(), p = data.p();
  if (center.size() != p || sigma.rows() != p || sigma.cols() != p)
    throw DimensionMismatch("save_kernel: center/sigma dimensions");

  MatrixXd u = data.x.rowwise() - center.transpose();
  MatrixXd v = MatrixXd::Zero(p, p);
  for (const auto& members : slice_members(data.y, spec)) {
    const auto nh = static_cast<Eigen::Index>(members.size());
    if (nh == 0) continue;
    MatrixXd s = MatrixXd::Zero(p, p);
    if (nh > 1) {
      MatrixXd rows(nh, p);
      for (Eigen::Index j = 0; j < nh; ++j) rows.row(j) = u.row(members[static_cast<std::size_t>(j)]);
      Eigen::RowVectorXd mh = rows.colwise().mean();
      rows.rowwise() -= mh;
      s.noalias() = rows.transpose() * rows / static_cast<double>(nh);
    }
    MatrixXd d = sigma - s;
    const double ph = static_cast<double>(nh) / static_cast<double>(n);
    v.noalias() += ph * (d * d);
  }
  v = 0.5 * (v + v.transpose().eval());
  return {std::move(v), Method::Save, KernelScale::StandardizedZ};
}

KernelMatrix dr_kernel(const MatrixXd& z, const SliceSpec& spec, const VectorXd& yvals,
                       bool check_standardized) {
  spec.validate();
  const auto n = z.rows(), p = z.cols();
  if (yvals.size() != n) throw DimensionMismatch("dr_kernel: response length");
  if (n < 1) throw Error("dr_kernel: empty input");

  if (check_standardized) {
    VectorXd mean = z.colwise().mean();
    if (mean.cwiseAbs().maxCoeff() > 1e-6) throw NotStandardized();
    if (n >= 2) {
      MatrixXd cov = sample_covariance(z);
      if ((cov - MatrixXd::Identity(p, p)).norm() > 1e-3) throw NotStandardized();
    }
  }

  MatrixXd second = MatrixXd::Zero(p, p);  // sum_h p_h A_h^2
  MatrixXd meanop = MatrixXd::Zero(p, p);  // sum_h p_h mu_h mu_h^T
  double mean_sq = 0.0;                    // sum_h p_h |mu_h|^2
  for (const auto& members : slice_members(yvals, spec)) {
    const auto nh = static_cast<Eigen::Index>(members.size());
    if (nh == 0) continue;
    MatrixXd rows(nh, p);
    for (Eigen::Index j = 0; j < nh; ++j) rows.row(j) = z.row(members[static_cast<std::size_t>(j)]);
    MatrixXd a = rows.transpose() * rows / static_cast<double>(nh);
    VectorXd mu = rows.colwise().mean();
    const double ph = static_cast<double>(nh) / static_cast<double>(n);
    second.noalias() += ph * (a * a);
    meanop.noalias() += ph * (mu * mu.transpose());
    mean_sq += ph * mu.squaredNorm();
  }
  MatrixXd v = 2.0 * second + 2.0 * (meanop * meanop) + 2.0 * mean_sq * meanop -
               2.0 * MatrixXd::Identity(p, p);
  v = 0.5 * (v + v.transpose().eval());
  return {std::move(v), Method::Dr, KernelScale::StandardizedZ};
}

}  // namespace dsdr
