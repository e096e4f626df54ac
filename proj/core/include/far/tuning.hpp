#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "far/dataset.hpp"
#include "far/folds.hpp"
#include "far/linear.hpp"
#include "far/nonlinear.hpp"

namespace far {

enum class TuneMode { ValidationSet, KFoldCV };
enum class TieBreak { Sparsest, Densest };

struct TuningRule {
    TuneMode mode = TuneMode::ValidationSet;
    int k = 20;  // KFoldCV only
    std::vector<int> q_candidates;
    std::vector<int> d_candidates;  // empty for linear methods
    TieBreak tie = TieBreak::Sparsest;
    std::uint64_t seed = 0;  // fold assignment
};

/// What to fit while tuning.
struct MethodSpec {
    bool nonlinear = false;
    PenaltySpec penalty;  // lambda is swept, the family/shape is used
    BasisKind basis = BasisKind::OrthoCubicSpline;
    int lambda_grid = 100;
    bool threshold = false;  // nonlinear: apply the thresholded estimator at the chosen lambda
    FitOptions fit;
    NonlinearOptions nl;
};

struct SurfaceCell {
    int q = 0;
    int d = -1;  // -1 for linear cells
    double lambda = 0.0;
    double error = 0.0;
};

struct TuningReport {
    double lambda = 0.0;
    int q = 0;
    int d = -1;
    std::vector<SurfaceCell> surface;
    std::vector<std::vector<double>> fold_errors;  // parallel to surface in CV mode, else empty
    std::optional<LinearFarModel> chosen_linear;
    std::optional<NonlinearFarModel> chosen_nonlinear;
};

/// True when a beats b under the tie-break rule (error first; ties prefer
/// larger lambda, then smaller q, then smaller d for Sparsest; reversed for
/// Densest).
bool cell_better(const SurfaceCell& a, const SurfaceCell& b, TieBreak tie);

/// Fit paths on the training set for every candidate dimension and pick the
/// cell minimizing mean squared prediction error on the validation set.
/// Validation responses are never seen by the fits.
TuningReport tune_validation(const FunctionalDataset& train, const FunctionalDataset& valid,
                             const MethodSpec& method, const TuningRule& rule);

/// K-fold cross-validation on one dataset. For nonlinear methods the rule is
/// passed through to the lambda selection inside the alternating fit.
TuningReport tune_cv(const FunctionalDataset& data, const MethodSpec& method, const TuningRule& rule);

/// Hold out a random fraction of every curve's time points (seeded, per
/// curve), project from the retained points with renormalized quadrature
/// weights, and return the candidate dimension with the smallest mean squared
/// reconstruction error on the held-out points.
int holdout_q_selection(const FunctionalDataset& data, double fraction, const std::vector<int>& candidates,
                        BasisKind kind, std::uint64_t seed);

}  // namespace far
