#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "far/basis.hpp"
#include "far/dataset.hpp"
#include "far/linear.hpp"
#include "far/link.hpp"
#include "far/penalty.hpp"
#include "far/scores.hpp"

namespace far {

struct NonlinearOptions {
    FitOptions inner;        // coordinate descent options for the xi step
    int lambda_grid = 100;
    int max_outer = 25;
    double outer_tol = 1e-5; // relative change of sum_j ||f_new - f_old||^2 / n
    int max_step_halvings = 5;
};

/// How the xi step picks lambda on each outer iteration (and how the linear
/// initializer picks its lambda).
struct LambdaRule {
    enum class Kind { Fixed, Validation, KFoldCV };
    Kind kind = Kind::Fixed;
    double fixed_lambda = 0.0;
    const FunctionalDataset* validation = nullptr;  // borrowed
    int k = 20;
    std::uint64_t fold_seed = 0;

    static LambdaRule fixed(double lambda) {
        LambdaRule r;
        r.kind = Kind::Fixed;
        r.fixed_lambda = lambda;
        return r;
    }
    static LambdaRule validation_set(const FunctionalDataset& valid) {
        LambdaRule r;
        r.kind = Kind::Validation;
        r.validation = &valid;
        return r;
    }
    static LambdaRule kfold(int k, std::uint64_t seed) {
        LambdaRule r;
        r.kind = Kind::KFoldCV;
        r.k = k;
        r.fold_seed = seed;
        return r;
    }
};

/// Fitted single-index FAR model.
struct NonlinearFarModel {
    BasisKind basis_kind = BasisKind::OrthoCubicSpline;
    int q = 0;
    int d = 0;
    std::vector<double> grid_points;
    double response_mean = 0.0;
    double lambda = 0.0;
    PenaltySpec penalty;

    std::vector<Eigen::VectorXd> eta;  // unit norm, first nonzero component positive
    std::vector<Eigen::VectorXd> xi;   // length d, zero when inactive
    std::vector<BSplineBasis> link;
    std::vector<char> link_valid;      // false when the index range was degenerate
    std::vector<Eigen::RowVectorXd> h_offsets;  // column means of H_j
    std::vector<Eigen::VectorXd> fitted_blocks;
    std::vector<double> block_norms;   // ||f_j|| / sqrt(n), kept for thresholding
    std::vector<int> active_set;
    double objective = 0.0;
    double selection_criterion = 0.0;  // value of the lambda rule at the chosen lambda
    int outer_iterations = 0;
    bool converged = true;

    int p() const { return static_cast<int>(eta.size()); }
};

/// Unit vector with the sign convention (first nonzero component positive);
/// the zero vector stays zero.
Eigen::VectorXd normalized_direction(const Eigen::VectorXd& v);

/// Step 0 of the nonlinear algorithm: linear FAR at the rule-selected lambda,
/// each nonzero coefficient vector normalized; zero fits fall back to the
/// leading eigenvector of Theta_j^T Theta_j / n.
std::vector<Eigen::VectorXd> init_eta(const std::vector<ScoreMatrix>& scores, const Eigen::VectorXd& y,
                                      const PenaltySpec& penalty, const LambdaRule& rule,
                                      double response_mean,
                                      const std::vector<ScoreMatrix>* validation_scores,
                                      const Eigen::VectorXd* validation_raw_y,
                                      const NonlinearOptions& options = {});

/// Step 2: fit the group criterion on the link designs with the linear
/// engine (model.eta holds the xi vectors). Degenerate designs enter as
/// zero matrices and always produce zero blocks.
LinearFarModel fit_xi_step(const std::vector<Eigen::MatrixXd>& link_designs, const Eigen::VectorXd& y,
                           const PenaltySpec& penalty, double lambda, const FitOptions& options = {});

struct EtaUpdate {
    std::vector<Eigen::VectorXd> eta;    // normalized, sign convention applied
    std::vector<Eigen::VectorXd> delta;  // raw increments (zero for skipped predictors)
    bool ridge_regularized = false;
};

/// Step 3: solve the Taylor-linearized least squares jointly over the active
/// predictors' increments; predictors with xi = 0 keep their eta. A singular
/// normal system is ridge-regularized with 1e-8 on the diagonal and flagged.
EtaUpdate update_eta_step(const std::vector<ScoreMatrix>& scores,
                          const std::vector<Eigen::VectorXd>& eta_old,
                          const std::vector<Eigen::VectorXd>& xi,
                          const std::vector<BSplineBasis>& links,
                          const std::vector<char>& link_valid,
                          const Eigen::VectorXd& residuals);

/// Sum of squared residuals of the index model with the link bases and H
/// column offsets held fixed.
double index_objective(const std::vector<ScoreMatrix>& scores, const std::vector<Eigen::VectorXd>& eta,
                       const std::vector<Eigen::VectorXd>& xi, const std::vector<BSplineBasis>& links,
                       const std::vector<char>& link_valid,
                       const std::vector<Eigen::RowVectorXd>& h_offsets, const Eigen::VectorXd& y);

/// Full alternating fit. eta_init overrides step 0 when provided.
NonlinearFarModel fit_nonlinear(const FunctionalDataset& train, const BasisSystem& basis,
                                const std::vector<ScoreMatrix>& scores, int d,
                                const PenaltySpec& penalty, const LambdaRule& rule,
                                const NonlinearOptions& options = {},
                                const std::vector<Eigen::VectorXd>* eta_init = nullptr);

/// Thresholded estimator: zero every block with ||f_j|| / sqrt(n) <= lambda.
/// The objective is refreshed when the response is supplied.
NonlinearFarModel threshold_model(const NonlinearFarModel& model, double lambda,
                                  const Eigen::VectorXd* y = nullptr);

Eigen::VectorXd predict_nonlinear_from_scores(const NonlinearFarModel& model,
                                              const std::vector<ScoreMatrix>& scores);
Eigen::VectorXd predict_nonlinear(const NonlinearFarModel& model, const FunctionalDataset& data);

}  // namespace far
