#include "far/basis.hpp"

#include <cmath>
#include <numbers>

#include "far/bspline.hpp"
#include "far/errors.hpp"

namespace far {

std::string to_string(BasisKind kind) {
    return kind == BasisKind::Fourier ? "fourier" : "ortho_cubic_spline";
}

BasisKind basis_kind_from_string(const std::string& s) {
    if (s == "fourier") return BasisKind::Fourier;
    if (s == "ortho_cubic_spline" || s == "spline") return BasisKind::OrthoCubicSpline;
    throw ConfigError("unknown basis kind: " + s);
}

Eigen::MatrixXd BasisSystem::gram() const {
    return values * grid.weights.asDiagonal() * values.transpose();
}

Eigen::VectorXd BasisSystem::synthesize(const Eigen::VectorXd& coef) const {
    if (coef.size() != q) throw ConfigError("synthesize: coefficient length != q");
    return values.transpose() * coef;
}

Eigen::MatrixXd fourier_raw(int q, const TimeGrid& grid) {
    if (q < 1) throw ConfigError("basis dimension must be >= 1");
    const int T = grid.size();
    Eigen::MatrixXd raw(q, T);
    raw.row(0).setOnes();
    const double sqrt2 = std::numbers::sqrt2;
    for (int l = 1; l < q; ++l)
        for (int k = 0; k < T; ++k)
            raw(l, k) = sqrt2 * std::sin(l * std::numbers::pi * grid.points(k));
    return raw;
}

namespace {

// Modified Gram-Schmidt in the quadrature inner product, two passes.
void orthonormalize(Eigen::MatrixXd& rows, const Eigen::VectorXd& w) {
    const int q = static_cast<int>(rows.rows());
    auto dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (a.array() * w.array() * b.array()).sum();
    };
    for (int l = 0; l < q; ++l) {
        Eigen::VectorXd v = rows.row(l).transpose();
        for (int pass = 0; pass < 2; ++pass)
            for (int m = 0; m < l; ++m) v -= dot(v, rows.row(m).transpose()) * rows.row(m).transpose();
        const double norm = std::sqrt(dot(v, v));
        if (!(norm > 1e-10))
            throw ConfigError("basis functions are numerically dependent on this grid");
        rows.row(l) = v.transpose() / norm;
    }
}

}  // namespace

BasisSystem make_basis(BasisKind kind, int q, const TimeGrid& grid) {
    if (q < 1) throw ConfigError("basis dimension must be >= 1");
    if (kind == BasisKind::OrthoCubicSpline && q < 4)
        throw ConfigError("ortho cubic spline basis needs q >= 4");
    if (grid.size() < q) throw ConfigError("grid has fewer points than basis dimension");

    Eigen::MatrixXd raw;
    if (kind == BasisKind::Fourier) {
        raw = fourier_raw(q, grid);
    } else {
        const BSplineBasis spline = BSplineBasis::uniform(0.0, 1.0, q);
        raw.resize(q, grid.size());
        for (int k = 0; k < grid.size(); ++k) raw.col(k) = spline.eval(grid.points(k));
    }
    orthonormalize(raw, grid.weights);
    return BasisSystem{kind, q, std::move(raw), grid};
}

}  // namespace far
