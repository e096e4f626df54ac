#include "far/grid.hpp"

#include <cmath>

#include "far/errors.hpp"

namespace far {

TimeGrid make_grid(const Eigen::VectorXd& points) {
    const int T = static_cast<int>(points.size());
    if (T < 2) throw InputError("time grid needs at least 2 points");
    if (!points.allFinite()) throw InputError("time grid has non-finite points");
    if (std::abs(points(0)) > 1e-12 || std::abs(points(T - 1) - 1.0) > 1e-12)
        throw InputError("time grid must start at 0 and end at 1");
    for (int k = 1; k < T; ++k)
        if (points(k) <= points(k - 1))
            throw InputError("time grid points must be strictly increasing");

    Eigen::VectorXd w = Eigen::VectorXd::Zero(T);
    for (int k = 0; k + 1 < T; ++k) {
        const double h = points(k + 1) - points(k);
        w(k) += 0.5 * h;
        w(k + 1) += 0.5 * h;
    }
    return TimeGrid{points, w};
}

TimeGrid uniform_grid(int T) {
    if (T < 2) throw InputError("time grid needs at least 2 points");
    Eigen::VectorXd pts(T);
    for (int k = 0; k < T; ++k) pts(k) = static_cast<double>(k) / (T - 1);
    pts(T - 1) = 1.0;
    return make_grid(pts);
}

}  // namespace far
