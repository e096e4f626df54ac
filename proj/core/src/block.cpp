#include "far/block.hpp"

#include <cmath>

#include "far/errors.hpp"

namespace far {

BlockFactor::BlockFactor(int predictor, const Eigen::MatrixXd& design) : predictor_(predictor) {
    if (design.rows() < 1 || design.cols() < 1) throw ConfigError("empty block design");
    if (!design.allFinite()) throw InputError("non-finite values in block design");
    col_means_ = design.colwise().mean();
    Eigen::MatrixXd centered = design.rowwise() - col_means_;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = sv.size() > 0 ? 1e-10 * sv(0) : 0.0;
    int r = 0;
    while (r < sv.size() && sv(r) > tol && sv(r) > 0.0) ++r;
    rank_ = r;
    u_ = svd.matrixU().leftCols(r);
    v_ = svd.matrixV().leftCols(r);
    sigma_ = sv.head(r);
}

Eigen::VectorXd BlockFactor::project(const Eigen::VectorXd& r) const {
    if (rank_ == 0) return Eigen::VectorXd::Zero(r.size());
    return u_ * (u_.transpose() * r);
}

Eigen::VectorXd BlockFactor::coef_from_block(const Eigen::VectorXd& block) const {
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(dim());
    if (rank_ == 0) return coef;
    coef = v_ * (u_.transpose() * block).cwiseQuotient(sigma_);
    return coef;
}

BlockUpdate block_update(const BlockFactor& factor, const Eigen::VectorXd& residual, double shrink_c) {
    if (shrink_c < 0.0) throw ConfigError("block_update: shrinkage coefficient must be >= 0");
    BlockUpdate out;
    Eigen::VectorXd proj = factor.project(residual);
    out.proj_norm = proj.norm();
    const double threshold = shrink_c * std::sqrt(static_cast<double>(residual.size()));
    if (out.proj_norm <= 0.0 || threshold >= out.proj_norm) {
        out.block = Eigen::VectorXd::Zero(residual.size());
        out.alpha = 0.0;
        return out;
    }
    out.alpha = 1.0 - threshold / out.proj_norm;
    out.block = out.alpha * proj;
    out.block.array() -= out.block.mean();  // exact no-op: the column space is centered
    return out;
}

}  // namespace far
