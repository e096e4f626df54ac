#pragma once
#include <Eigen/Dense>

#include "far/bspline.hpp"

namespace far {

/// Link-function design for one predictor: cubic B-spline basis on the
/// index range, evaluated at each observation's index value.
struct LinkDesign {
    BSplineBasis basis;
    Eigen::MatrixXd H;  // n x d, row i = h(theta_ij^T eta_j)^T; empty when degenerate
    bool degenerate = false;
    double lo = 0.0, hi = 0.0;
};

/// Build the basis with uniform knots on [min index, max index] and the
/// design rows. A degenerate index range (all indices equal) is flagged and
/// returns an empty design; the caller treats the predictor as a zero block
/// for the current iteration.
LinkDesign build_link_design(const Eigen::MatrixXd& scores, const Eigen::VectorXd& eta, int d);

/// Basis rows at arbitrary index values (linear extension outside the range).
Eigen::MatrixXd link_rows(const BSplineBasis& basis, const Eigen::VectorXd& indices);
Eigen::MatrixXd link_deriv_rows(const BSplineBasis& basis, const Eigen::VectorXd& indices);

}  // namespace far
