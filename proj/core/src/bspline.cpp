#include "far/bspline.hpp"

#include <array>

#include "far/errors.hpp"

namespace far {

BSplineBasis BSplineBasis::uniform(double lo, double hi, int dim) {
    if (dim < 4) throw ConfigError("cubic B-spline basis needs dim >= 4");
    if (!(hi > lo)) throw ConfigError("B-spline interval is degenerate");
    BSplineBasis b;
    b.lo_ = lo;
    b.hi_ = hi;
    b.dim_ = dim;
    b.knots_.resize(dim + 4);
    for (int k = 0; k < 4; ++k) {
        b.knots_(k) = lo;
        b.knots_(dim + k) = hi;
    }
    const int interior = dim - 4;
    for (int i = 1; i <= interior; ++i)
        b.knots_(3 + i) = lo + (hi - lo) * static_cast<double>(i) / (interior + 1);
    return b;
}

int BSplineBasis::find_span(double u) const {
    // last span [knots(k), knots(k+1)) with k in [3, dim-1]; u == hi maps to dim-1
    if (u >= knots_(dim_)) return dim_ - 1;
    int k = 3;
    while (k + 1 <= dim_ - 1 && u >= knots_(k + 1)) ++k;
    return k;
}

void BSplineBasis::eval_inside(double u, Eigen::VectorXd& value, Eigen::VectorXd* deriv) const {
    const int span = find_span(u);
    std::array<double, 4> N{1.0, 0.0, 0.0, 0.0};
    std::array<double, 4> left{}, right{};
    std::array<double, 3> Nq{};  // degree-2 values, saved at j == 2

    for (int j = 1; j <= 3; ++j) {
        left[static_cast<std::size_t>(j)] = u - knots_(span + 1 - j);
        right[static_cast<std::size_t>(j)] = knots_(span + j) - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double den = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
            const double temp = den != 0.0 ? N[static_cast<std::size_t>(r)] / den : 0.0;
            N[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        N[static_cast<std::size_t>(j)] = saved;
        if (j == 2) {
            Nq[0] = N[0];
            Nq[1] = N[1];
            Nq[2] = N[2];
        }
    }

    value.setZero(dim_);
    for (int r = 0; r <= 3; ++r) value(span - 3 + r) = N[static_cast<std::size_t>(r)];

    if (deriv != nullptr) {
        deriv->setZero(dim_);
        // N'_{i,3} = 3 (Nq_i / (t_{i+3} - t_i) - Nq_{i+1} / (t_{i+4} - t_{i+1}))
        // Quadratic values Nq_* are nonzero only for indices span-2 .. span.
        auto quad = [&](int i) -> double {
            const int off = i - (span - 2);
            return (off >= 0 && off <= 2) ? Nq[static_cast<std::size_t>(off)] : 0.0;
        };
        for (int r = 0; r <= 3; ++r) {
            const int i = span - 3 + r;
            double d = 0.0;
            const double den1 = knots_(i + 3) - knots_(i);
            const double den2 = knots_(i + 4) - knots_(i + 1);
            if (den1 != 0.0) d += quad(i) / den1;
            if (den2 != 0.0) d -= quad(i + 1) / den2;
            (*deriv)(i) = 3.0 * d;
        }
    }
}

void BSplineBasis::eval_with_deriv(double u, Eigen::VectorXd& value, Eigen::VectorXd& deriv) const {
    if (u < lo_ || u > hi_) {
        const double edge = u < lo_ ? lo_ : hi_;
        Eigen::VectorXd v0, d0;
        eval_inside(edge, v0, &d0);
        value = v0 + (u - edge) * d0;
        deriv = d0;
        return;
    }
    eval_inside(u, value, &deriv);
}

Eigen::VectorXd BSplineBasis::eval(double u) const {
    Eigen::VectorXd v, d;
    if (u < lo_ || u > hi_) {
        eval_with_deriv(u, v, d);
        return v;
    }
    eval_inside(u, v, nullptr);
    return v;
}

Eigen::VectorXd BSplineBasis::deriv(double u) const {
    Eigen::VectorXd v, d;
    eval_with_deriv(u, v, d);
    return d;
}

}  // namespace far
