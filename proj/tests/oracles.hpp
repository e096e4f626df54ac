#pragma once
// Test-side oracles, kept independent of the library's implementation paths.
#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace oracles {

// Textbook Cox-de Boor recursion for one B-spline basis function of the
// given order (degree + 1) over an explicit knot vector. The rightmost
// interval is treated as closed.
double bspline_recursive(const Eigen::VectorXd& knots, int i, int order, double u);

// Proximal-gradient (ISTA) solver for the group criterion
//   (1/2n) ||y - sum_j f_j||^2 + (lambda / sqrt n) sum_j ||f_j||
// over blocks f_j constrained to the column space of the centered designs.
struct ProxResult {
    double objective = 0.0;
    std::vector<Eigen::VectorXd> blocks;
    int iterations = 0;
};
ProxResult prox_gradient(const std::vector<Eigen::MatrixXd>& designs, const Eigen::VectorXd& y,
                         double lambda, int max_iter = 500000, double tol = 1e-13);

// Composite Simpson quadrature of f over [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, int intervals);

// Least squares coefficients of y on the column-centered design (min-norm).
Eigen::VectorXd centered_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);

// Leading eigenvector of a symmetric PSD matrix by power iteration.
Eigen::VectorXd power_iteration(const Eigen::MatrixXd& sym, int iters = 10000);

}  // namespace oracles
