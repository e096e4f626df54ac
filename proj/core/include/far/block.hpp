#pragma once
#include <Eigen/Dense>

namespace far {

/// Orthogonal factorization of one predictor's design matrix, sufficient to
/// apply the block projection S_j and to recover the coefficient vector from
/// a fitted block. Built once per design and reused along the lambda path.
///
/// The columns are centered first (the per-column means are kept as the
/// prediction offsets), so every vector in the projected column space has
/// mean zero and the centering step of the block update is exact. Rank is
/// revealed by a thin SVD with tolerance 1e-10 times the largest singular
/// value; the projection is onto the retained column space.
class BlockFactor {
public:
    BlockFactor(int predictor, const Eigen::MatrixXd& design);

    int predictor() const { return predictor_; }
    int n() const { return static_cast<int>(u_.rows()); }
    int dim() const { return static_cast<int>(col_means_.size()); }
    int rank() const { return rank_; }
    bool degenerate() const { return rank_ == 0; }
    const Eigen::RowVectorXd& column_means() const { return col_means_; }

    /// S_j r: orthogonal projection of r onto the centered column space.
    Eigen::VectorXd project(const Eigen::VectorXd& r) const;

    /// Minimum-norm coefficients with (centered design) * coef = block.
    Eigen::VectorXd coef_from_block(const Eigen::VectorXd& block) const;

private:
    int predictor_ = 0;
    int rank_ = 0;
    Eigen::RowVectorXd col_means_;
    Eigen::MatrixXd u_;       // n x rank
    Eigen::MatrixXd v_;       // dim x rank
    Eigen::VectorXd sigma_;   // rank
};

struct BlockUpdate {
    Eigen::VectorXd block;  // fitted block, mean zero
    double alpha = 0.0;     // shrinkage factor
    double proj_norm = 0.0; // ||S_j r||
};

/// One step of the block coordinate update: project the residual, apply the
/// positive-part shrinkage alpha = (1 - c sqrt(n) / ||P||)_+, center.
/// c is the penalty derivative value for this visit (lambda for the Lasso).
BlockUpdate block_update(const BlockFactor& factor, const Eigen::VectorXd& residual, double shrink_c);

}  // namespace far
