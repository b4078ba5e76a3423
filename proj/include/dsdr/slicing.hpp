#pragma once

#include <Eigen/Dense>

#include "dsdr/dataset.hpp"

namespace dsdr {

// H+1 ascending grid points defining H response slices. Slice h (1-based) is
// the interval (grid[h-1], grid[h]]; slice 1 is additionally closed on the
// left so the minimum is not dropped.
struct SliceSpec {
  VectorXd grid;

  int slice_count() const { return static_cast<int>(grid.size()) - 1; }
  double y_min() const { return grid(0); }
  double y_max() const { return grid(grid.size() - 1); }
  void validate() const;
};

// Equal-width grid over [y_min, y_max]. This is the grid the distributed
// protocol uses: it is computable from the range alone.
SliceSpec make_slice_grid(double y_min, double y_max, int slice_count);

// Equal-count grid with cut points at order statistics. Needs the full
// response sample; coincident cut points are collapsed, so the result may
// hold fewer than the requested number of slices.
SliceSpec make_quantile_grid(const VectorXd& y, int slice_count);

// 1-based slice index for a response value. Throws OutOfRange outside the grid.
int assign_slice(double y, const SliceSpec& spec);

// Per-slice counts and sums of centered predictors, plus the total scatter
// of the centered predictors (all observations, not per slice).
struct SliceStats {
  Eigen::VectorX<long long> counts;  // H
  MatrixXd sums;                     // H x p, sums of (x_i - center) per slice
  MatrixXd scatter;                  // p x p, sum over all i of u_i u_i^T
  long long n = 0;
};

SliceStats slice_statistics(const Dataset& data, const VectorXd& center, const SliceSpec& spec);

}  // namespace dsdr
