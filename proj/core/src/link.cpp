#include "far/link.hpp"

#include <cmath>

#include "far/errors.hpp"

namespace far {

LinkDesign build_link_design(const Eigen::MatrixXd& scores, const Eigen::VectorXd& eta, int d) {
    if (d < 4) throw ConfigError("link basis needs d >= 4");
    if (scores.cols() != eta.size()) throw ConfigError("index vector length differs from score dimension");
    if (std::abs(eta.norm() - 1.0) > 1e-8) throw ConfigError("index vector must have unit norm");
    const Eigen::VectorXd idx = scores * eta;
    LinkDesign out;
    out.lo = idx.minCoeff();
    out.hi = idx.maxCoeff();
    const double scale = std::max({1.0, std::abs(out.lo), std::abs(out.hi)});
    if (out.hi - out.lo <= 1e-12 * scale) {
        out.degenerate = true;
        return out;
    }
    out.basis = BSplineBasis::uniform(out.lo, out.hi, d);
    out.H = link_rows(out.basis, idx);
    return out;
}

Eigen::MatrixXd link_rows(const BSplineBasis& basis, const Eigen::VectorXd& indices) {
    Eigen::MatrixXd H(indices.size(), basis.dim());
    for (int i = 0; i < indices.size(); ++i) H.row(i) = basis.eval(indices(i)).transpose();
    return H;
}

Eigen::MatrixXd link_deriv_rows(const BSplineBasis& basis, const Eigen::VectorXd& indices) {
    Eigen::MatrixXd D(indices.size(), basis.dim());
    for (int i = 0; i < indices.size(); ++i) D.row(i) = basis.deriv(indices(i)).transpose();
    return D;
}

}  // namespace far
