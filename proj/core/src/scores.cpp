#include "far/scores.hpp"

#include "far/errors.hpp"

namespace far {

ScoreMatrix project_curves(const FunctionalDataset& data, const BasisSystem& basis, int predictor) {
    if (predictor < 0 || predictor >= data.p())
        throw ConfigError("predictor index out of range");
    if (data.grid.size() != basis.grid.size() ||
        (data.grid.points - basis.grid.points).lpNorm<Eigen::Infinity>() > 1e-12)
        throw InputError("curve grid does not match basis grid");
    const Eigen::MatrixXd& X = data.curves[static_cast<std::size_t>(predictor)];
    if (!X.allFinite()) throw InputError("non-finite curve values");
    Eigen::MatrixXd s = X * basis.grid.weights.asDiagonal() * basis.values.transpose();
    return ScoreMatrix{predictor, basis.q, std::move(s)};
}

std::vector<ScoreMatrix> project_all(const FunctionalDataset& data, const BasisSystem& basis) {
    std::vector<ScoreMatrix> out;
    out.reserve(static_cast<std::size_t>(data.p()));
    for (int j = 0; j < data.p(); ++j) out.push_back(project_curves(data, basis, j));
    return out;
}

}  // namespace far
