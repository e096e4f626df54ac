#pragma once
#include <Eigen/Dense>
#include <string>

#include "far/grid.hpp"

namespace far {

enum class BasisKind { Fourier, OrthoCubicSpline };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& s);

/// Orthonormal function basis evaluated on a time grid.
///
/// values is q x T; orthonormality is with respect to the grid quadrature
/// inner product <f, g> = sum_k w_k f(t_k) g(t_k), i.e. B W B^T = I.
struct BasisSystem {
    BasisKind kind = BasisKind::Fourier;
    int q = 0;
    Eigen::MatrixXd values;  // q x T
    TimeGrid grid;

    /// B W B^T under the grid quadrature.
    Eigen::MatrixXd gram() const;

    /// Curve on the grid from basis coefficients.
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coef) const;
};

/// Raw Fourier family (1, sqrt2 sin(pi t), sqrt2 sin(2 pi t), ...) on the
/// grid, q x T, without orthonormalization. This is the family the synthetic
/// data generator uses.
Eigen::MatrixXd fourier_raw(int q, const TimeGrid& grid);

/// Build a basis of the given kind and dimension.
///
/// Fourier starts from fourier_raw; OrthoCubicSpline starts from a clamped
/// cubic B-spline basis with q - 4 uniform interior knots on [0, 1]. Either
/// family is then orthonormalized under the quadrature inner product with
/// modified Gram-Schmidt, re-orthogonalized once, so the span is preserved
/// and the Gram matrix is the identity to near machine precision.
BasisSystem make_basis(BasisKind kind, int q, const TimeGrid& grid);

}  // namespace far
