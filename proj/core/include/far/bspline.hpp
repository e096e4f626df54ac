#pragma once
#include <Eigen/Dense>

namespace far {

/// Clamped cubic B-spline basis with uniformly placed interior knots on
/// [lo, hi]. dim >= 4 basis functions; dim - 4 interior knots.
///
/// Inside [lo, hi] evaluation is the standard Cox-de Boor triangular scheme.
/// Outside the interval the basis is extended to first order from the nearest
/// boundary (value plus one-sided slope times the overshoot), which keeps
/// every basis function C^1 across the boundary; the derivative is constant
/// there.
class BSplineBasis {
public:
    BSplineBasis() = default;

    static BSplineBasis uniform(double lo, double hi, int dim);

    int dim() const { return dim_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const Eigen::VectorXd& knots() const { return knots_; }

    /// Basis values at u, length dim. Rows sum to 1 on [lo, hi].
    Eigen::VectorXd eval(double u) const;
    /// First derivatives at u, length dim.
    Eigen::VectorXd deriv(double u) const;
    void eval_with_deriv(double u, Eigen::VectorXd& value, Eigen::VectorXd& deriv) const;

private:
    void eval_inside(double u, Eigen::VectorXd& value, Eigen::VectorXd* deriv) const;
    int find_span(double u) const;

    double lo_ = 0.0, hi_ = 1.0;
    int dim_ = 0;
    Eigen::VectorXd knots_;  // dim + 4 entries, clamped
};

}  // namespace far
