#include "dsdr/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dsdr {

void SliceSpec::validate() const {
  if (grid.size() < 3) throw InvalidSliceCount();
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    if (!(grid(i - 1) < grid(i))) throw Error("slice grid is not strictly ascending");
}

SliceSpec make_slice_grid(double y_min, double y_max, int slice_count) {
  if (slice_count < 2) throw InvalidSliceCount();
  if (!(y_min < y_max)) throw DegenerateRange();
  SliceSpec spec;
  spec.grid.resize(slice_count + 1);
  const double width = (y_max - y_min) / slice_count;
  for (int h = 0; h <= slice_count; ++h) spec.grid(h) = y_min + h * width;
  spec.grid(slice_count) = y_max;  // guard against rounding drift at the top end
  return spec;
}

SliceSpec make_quantile_grid(const VectorXd& y, int slice_count) {
  if (slice_count < 2) throw InvalidSliceCount();
  const Eigen::Index n = y.size();
  if (n < 2) throw DegenerateRange("need at least two observations for a quantile grid");
  std::vector<double> ys(y.data(), y.data() + n);
  std::sort(ys.begin(), ys.end());
  if (!(ys.front() < ys.back())) throw DegenerateRange();

  std::vector<double> cuts;
  cuts.push_back(ys.front());
  for (int h = 1; h < slice_count; ++h) {
    auto idx = static_cast<Eigen::Index>(std::llround(static_cast<double>(h) * n / slice_count)) - 1;
    idx = std::clamp<Eigen::Index>(idx, 0, n - 1);
    const double v = ys[static_cast<std::size_t>(idx)];
    if (v > cuts.back()) cuts.push_back(v);
  }
  if (ys.back() > cuts.back())
    cuts.push_back(ys.back());
  else
    cuts.back() = ys.back();
  if (cuts.size() < 3) {
    // Heavily tied sample; fall back to a two-slice split of the range.
    cuts = {ys.front(), 0.5 * (ys.front() + ys.back()), ys.back()};
  }
  SliceSpec spec;
  spec.grid = Eigen::Map<VectorXd>(cuts.data(), static_cast<Eigen::Index>(cuts.size()));
  spec.validate();
  return spec;
}

int assign_slice(double y, const SliceSpec& spec) {
  const auto& g = spec.grid;
  const int H = spec.slice_count();
  if (y < g(0) || y > g(H)) throw OutOfRange();
  // smallest h >= 1 with y <= grid[h]; slice 1 absorbs the left endpoint
  const double* begin = g.data() + 1;
  const double* end = g.data() + H + 1;
  const double* it = std::lower_bound(begin, end, y);
  int h = static_cast<int>(it - g.data());
  return std::min(std::max(h, 1), H);
}

SliceStats slice_statistics(const Dataset& data, const VectorXd& center, const SliceSpec& spec) {
  data.validate();
  spec.validate();
  const Eigen::Index n = data.n(), p = data.p();
  if (center.size() != p) throw DimensionMismatch("center length does not match predictor dimension");

  const int H = spec.slice_count();
  SliceStats stats;
  stats.counts = Eigen::VectorX<long long>::Zero(H);
  stats.sums = MatrixXd::Zero(H, p);
  stats.scatter = MatrixXd::Zero(p, p);
  stats.n = n;

  MatrixXd u = data.x.rowwise() - center.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int h = assign_slice(data.y(i), spec) - 1;
    stats.counts(h) += 1;
    stats.sums.row(h) += u.row(i);
  }
  stats.scatter.noalias() = u.transpose() * u;
  return stats;
}

}  // namespace dsdr
