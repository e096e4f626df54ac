#pragma once
#include <Eigen/Dense>
#include <vector>

#include "far/basis.hpp"
#include "far/block.hpp"
#include "far/dataset.hpp"
#include "far/penalty.hpp"
#include "far/scores.hpp"

namespace far {

struct FitOptions {
    double tol = 1e-6;     // max block change in ||.||/sqrt(n) per sweep
    int max_sweeps = 1000;
};

/// Fitted linear FAR model: per-predictor coefficient vectors plus the score
/// centering offsets needed for prediction.
struct LinearFarModel {
    BasisKind basis_kind = BasisKind::OrthoCubicSpline;
    int q = 0;
    std::vector<double> grid_points;  // training grid (empty for raw-score fits)
    double response_mean = 0.0;
    double lambda = 0.0;
    PenaltySpec penalty;

    std::vector<Eigen::VectorXd> eta;              // p entries, length q, zero when inactive
    std::vector<Eigen::RowVectorXd> score_offsets; // per-predictor column means of the scores
    std::vector<Eigen::VectorXd> fitted_blocks;    // p entries, length n; empty after deserialization
    std::vector<int> active_set;
    double objective = 0.0;
    int sweeps = 0;
    bool converged = true;

    int p() const { return static_cast<int>(eta.size()); }
};

struct FitPath {
    std::vector<double> lambdas;  // strictly decreasing
    std::vector<LinearFarModel> models;
};

std::vector<BlockFactor> make_factors(const std::vector<ScoreMatrix>& scores);

/// Smallest lambda for which the Lasso fit is the all-zero model:
/// max_j ||S_j y|| / sqrt(n).
double lambda_max(const std::vector<BlockFactor>& factors, const Eigen::VectorXd& y);

/// Log-spaced grid over `decades` decades below lmax, lmax first.
std::vector<double> lambda_grid(double lmax, int grid_size, double decades = 3.0);

/// Criterion value at the given blocks: ||y - sum f_j||^2 / 2n + sum rho(||f_j|| / sqrt(n)).
double linear_objective(const Eigen::VectorXd& y, const std::vector<Eigen::VectorXd>& blocks,
                        const PenaltySpec& penalty);

/// Cyclic block coordinate descent at one lambda. For the Lasso the shrink
/// coefficient is lambda at every visit; for SCAD it is rho'(||f_j||/sqrt n)
/// at the most recent block estimate, and a cold start first runs the Lasso
/// fit at the same lambda as initializer. Convergence requires the max block
/// change below tol and a passing KKT verification sweep.
LinearFarModel fit_at_lambda(const std::vector<BlockFactor>& factors, const Eigen::VectorXd& y,
                             const PenaltySpec& penalty, const LinearFarModel* init = nullptr,
                             const FitOptions& options = {});
LinearFarModel fit_at_lambda(const std::vector<ScoreMatrix>& scores, const Eigen::VectorXd& y,
                             const PenaltySpec& penalty, const LinearFarModel* init = nullptr,
                             const FitOptions& options = {});

/// Warm-started fits down an explicit decreasing grid.
FitPath lambda_path(const std::vector<BlockFactor>& factors, const Eigen::VectorXd& y,
                    const PenaltySpec& penalty, const std::vector<double>& grid,
                    const FitOptions& options = {});
FitPath lambda_path(const std::vector<ScoreMatrix>& scores, const Eigen::VectorXd& y,
                    const PenaltySpec& penalty, int grid_size, const FitOptions& options = {});

/// K-fold cross-validation curve over a shared lambda grid. The grid starts
/// at the largest lambda_max across the full data and every fold's training
/// part, so the first model on every path is empty. Fold responses are
/// centered per fold; held-out predictions add the fold mean back.
struct CvCurve {
    std::vector<double> grid;
    std::vector<double> cv_error;               // per lambda, mean of fold MSEs
    std::vector<std::vector<double>> fold_mse;  // [lambda][fold]
    FitPath full_path;                          // fit on the full data over the same grid
    int chosen = 0;                             // argmin of cv_error, ties toward larger lambda
};
CvCurve cross_validate_path(const std::vector<Eigen::MatrixXd>& designs, const Eigen::VectorXd& y,
                            const PenaltySpec& penalty, int grid_size,
                            const std::vector<std::vector<int>>& folds, const FitOptions& options = {});

/// response_mean + sum_j (theta* - offsets_j)^T eta_j for new score rows.
Eigen::VectorXd predict_from_scores(const LinearFarModel& model, const std::vector<ScoreMatrix>& scores);

/// Project new curves with the model's basis and predict. The new dataset
/// must share the training grid.
Eigen::VectorXd predict_linear(const LinearFarModel& model, const FunctionalDataset& data);

/// Fit on a dataset at one lambda, filling basis metadata.
LinearFarModel fit_linear(const FunctionalDataset& data, BasisKind kind, int q,
                          const PenaltySpec& penalty, double lambda, const FitOptions& options = {});

}  // namespace far
