#pragma once
#include <Eigen/Dense>
#include <vector>

#include "far/basis.hpp"
#include "far/dataset.hpp"

namespace far {

/// n x q matrix of basis coefficients of one predictor's curves.
struct ScoreMatrix {
    int predictor = 0;
    int q = 0;
    Eigen::MatrixXd scores;  // n x q, row i holds the coefficients of curve i
};

/// Quadrature projection: scores(i, l) = sum_k w_k X_ij(t_k) b_l(t_k).
ScoreMatrix project_curves(const FunctionalDataset& data, const BasisSystem& basis, int predictor);

std::vector<ScoreMatrix> project_all(const FunctionalDataset& data, const BasisSystem& basis);

}  // namespace far
