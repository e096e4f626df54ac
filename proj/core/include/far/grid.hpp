#pragma once
#include <Eigen/Dense>

namespace far {

/// Observation grid on [0, 1] with trapezoidal quadrature weights.
struct TimeGrid {
    Eigen::VectorXd points;   // strictly increasing, points(0) == 0, points(T-1) == 1
    Eigen::VectorXd weights;  // trapezoid weights, positive, sum to 1

    int size() const { return static_cast<int>(points.size()); }
};

/// Validate the points and attach trapezoid weights. Throws InputError on a
/// grid that is unsorted, has duplicates, or does not span [0, 1].
TimeGrid make_grid(const Eigen::VectorXd& points);

/// T equally spaced points 0 = t_1 < ... < t_T = 1.
TimeGrid uniform_grid(int T);

}  // namespace far
