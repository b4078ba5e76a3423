#pragma once

#include <Eigen/Dense>

#include "dsdr/errors.hpp"

namespace dsdr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// One estimation unit: an n x p predictor matrix paired with an n-vector response.
struct Dataset {
  MatrixXd x;
  VectorXd y;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }

  void validate() const {
    if (x.rows() < 1 || x.cols() < 1) throw Error("dataset must have n >= 1 and p >= 1");
    if (y.size() != x.rows()) throw DimensionMismatch("response length does not match predictor rows");
    if (!x.allFinite() || !y.allFinite()) throw Error("dataset contains non-finite entries");
  }
};

}  // namespace dsdr
