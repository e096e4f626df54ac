#include "far/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "far/errors.hpp"
#include "far/rng.hpp"

namespace far {

bool cell_better(const SurfaceCell& a, const SurfaceCell& b, TieBreak tie) {
    if (a.error != b.error) return a.error < b.error;
    if (tie == TieBreak::Sparsest) {
        if (a.lambda != b.lambda) return a.lambda > b.lambda;
        if (a.q != b.q) return a.q < b.q;
        return a.d < b.d;
    }
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.q != b.q) return a.q > b.q;
    return a.d > b.d;
}

namespace {

void check_same_grid(const FunctionalDataset& a, const FunctionalDataset& b) {
    if (a.grid.size() != b.grid.size() ||
        (a.grid.points - b.grid.points).lpNorm<Eigen::Infinity>() > 1e-12)
        throw InputError("train and validation sets are not on the same grid");
    if (a.p() != b.p()) throw InputError("train and validation sets disagree on predictor count");
}

void check_rule(const MethodSpec& method, const TuningRule& rule) {
    if (rule.q_candidates.empty()) throw ConfigError("tuning rule has no q candidates");
    if (method.nonlinear && rule.d_candidates.empty())
        throw ConfigError("nonlinear tuning rule has no d candidates");
}

void fill_metadata(LinearFarModel& m, const MethodSpec& method, int q, const FunctionalDataset& train) {
    m.basis_kind = method.basis;
    m.q = q;
    m.grid_points.assign(train.grid.points.data(), train.grid.points.data() + train.grid.size());
    m.response_mean = train.response_mean;
}

}  // namespace

TuningReport tune_validation(const FunctionalDataset& train, const FunctionalDataset& valid,
                             const MethodSpec& method, const TuningRule& rule) {
    check_same_grid(train, valid);
    check_rule(method, rule);
    const Eigen::VectorXd val_raw = valid.y.array() + valid.response_mean;

    TuningReport report;
    bool have_best = false;
    SurfaceCell best;

    for (int q : rule.q_candidates) {
        const BasisSystem basis = make_basis(method.basis, q, train.grid);
        const auto scores = project_all(train, basis);
        const auto val_scores = project_all(valid, basis);

        if (!method.nonlinear) {
            const auto factors = make_factors(scores);
            const auto grid = lambda_grid(lambda_max(factors, train.y), method.lambda_grid);
            FitPath path = lambda_path(factors, train.y, method.penalty, grid, method.fit);
            for (std::size_t i = 0; i < path.models.size(); ++i) {
                LinearFarModel& m = path.models[i];
                fill_metadata(m, method, q, train);
                const Eigen::VectorXd pred = predict_from_scores(m, val_scores);
                const double err = (pred - val_raw).squaredNorm() / static_cast<double>(val_raw.size());
                SurfaceCell cell{q, -1, grid[i], err};
                report.surface.push_back(cell);
                if (!have_best || cell_better(cell, best, rule.tie)) {
                    have_best = true;
                    best = cell;
                    report.chosen_linear = m;
                }
            }
            continue;
        }

        const LambdaRule inner = LambdaRule::validation_set(valid);
        const auto eta0 = init_eta(scores, train.y, method.penalty, inner, train.response_mean,
                                   &val_scores, &val_raw, method.nl);
        for (int d : rule.d_candidates) {
            NonlinearFarModel model =
                fit_nonlinear(train, basis, scores, d, method.penalty, inner, method.nl, &eta0);
            if (method.threshold) model = threshold_model(model, model.lambda, &train.y);
            const Eigen::VectorXd pred = predict_nonlinear_from_scores(model, val_scores);
            const double err = (pred - val_raw).squaredNorm() / static_cast<double>(val_raw.size());
            SurfaceCell cell{q, d, model.lambda, err};
            report.surface.push_back(cell);
            if (!have_best || cell_better(cell, best, rule.tie)) {
                have_best = true;
                best = cell;
                report.chosen_nonlinear = std::move(model);
            }
        }
    }

    report.lambda = best.lambda;
    report.q = best.q;
    report.d = best.d;
    return report;
}

TuningReport tune_cv(const FunctionalDataset& data, const MethodSpec& method, const TuningRule& rule) {
    check_rule(method, rule);
    const int n = static_cast<int>(data.y.size());
    const auto folds = make_folds(n, rule.k, rule.seed);

    TuningReport report;
    bool have_best = false;
    SurfaceCell best;

    for (int q : rule.q_candidates) {
        const BasisSystem basis = make_basis(method.basis, q, data.grid);
        const auto scores = project_all(data, basis);

        if (!method.nonlinear) {
            std::vector<Eigen::MatrixXd> designs;
            designs.reserve(scores.size());
            for (const auto& s : scores) designs.push_back(s.scores);
            CvCurve cv =
                cross_validate_path(designs, data.y, method.penalty, method.lambda_grid, folds, method.fit);
            for (std::size_t i = 0; i < cv.grid.size(); ++i) {
                SurfaceCell cell{q, -1, cv.grid[i], cv.cv_error[i]};
                report.surface.push_back(cell);
                report.fold_errors.push_back(cv.fold_mse[i]);
                if (!have_best || cell_better(cell, best, rule.tie)) {
                    have_best = true;
                    best = cell;
                    LinearFarModel m = cv.full_path.models[i];
                    fill_metadata(m, method, q, data);
                    report.chosen_linear = std::move(m);
                }
            }
            continue;
        }

        const LambdaRule inner = LambdaRule::kfold(rule.k, rule.seed);
        const auto eta0 =
            init_eta(scores, data.y, method.penalty, inner, data.response_mean, nullptr, nullptr, method.nl);
        for (int d : rule.d_candidates) {
            NonlinearFarModel model =
                fit_nonlinear(data, basis, scores, d, method.penalty, inner, method.nl, &eta0);
            SurfaceCell cell{q, d, model.lambda, model.selection_criterion};
            if (method.threshold) model = threshold_model(model, model.lambda, &data.y);
            report.surface.push_back(cell);
            if (!have_best || cell_better(cell, best, rule.tie)) {
                have_best = true;
                best = cell;
                report.chosen_nonlinear = std::move(model);
            }
        }
    }

    report.lambda = best.lambda;
    report.q = best.q;
    report.d = best.d;
    return report;
}

int holdout_q_selection(const FunctionalDataset& data, double fraction, const std::vector<int>& candidates,
                        BasisKind kind, std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 0.5) throw ConfigError("holdout fraction must lie in (0, 0.5]");
    if (candidates.empty()) throw ConfigError("holdout_q_selection has no candidates");
    const int T = data.grid.size();
    const int h = static_cast<int>(std::lround(fraction * T));
    if (h < 1) throw ConfigError("holdout fraction keeps no points");
    const int qmax = *std::max_element(candidates.begin(), candidates.end());
    if (T - h < qmax) throw ConfigError("too few retained time points for the largest candidate dimension");

    // per-curve holdout masks, drawn once and shared by every candidate
    Rng rng(seed);
    const int p = data.p();
    const int n = data.n();
    std::vector<std::vector<char>> held(static_cast<std::size_t>(p) * static_cast<std::size_t>(n));
    std::vector<int> pool(static_cast<std::size_t>(T));
    for (std::size_t c = 0; c < held.size(); ++c) {
        for (int k = 0; k < T; ++k) pool[static_cast<std::size_t>(k)] = k;
        std::vector<char> mask(static_cast<std::size_t>(T), 0);
        for (int b = 0; b < h; ++b) {
            const int pick = b + rng.uniform_int(T - b);
            std::swap(pool[static_cast<std::size_t>(b)], pool[static_cast<std::size_t>(pick)]);
            mask[static_cast<std::size_t>(pool[static_cast<std::size_t>(b)])] = 1;
        }
        held[c] = std::move(mask);
    }

    int best_q = candidates.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (int q : candidates) {
        const BasisSystem basis = make_basis(kind, q, data.grid);
        double sse = 0.0;
        long count = 0;
        for (int j = 0; j < p; ++j) {
            const Eigen::MatrixXd& X = data.curves[static_cast<std::size_t>(j)];
            for (int i = 0; i < n; ++i) {
                const auto& mask = held[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
                                        static_cast<std::size_t>(i)];
                Eigen::VectorXd w = data.grid.weights;
                for (int k = 0; k < T; ++k)
                    if (mask[static_cast<std::size_t>(k)]) w(k) = 0.0;
                w /= w.sum();
                const Eigen::VectorXd x = X.row(i).transpose();
                const Eigen::VectorXd coef = basis.values * w.cwiseProduct(x);
                const Eigen::VectorXd recon = basis.values.transpose() * coef;
                for (int k = 0; k < T; ++k) {
                    if (!mask[static_cast<std::size_t>(k)]) continue;
                    const double e = recon(k) - x(k);
                    sse += e * e;
                    ++count;
                }
            }
        }
        const double err = sse / static_cast<double>(count);
        if (err < best_err) {
            best_err = err;
            best_q = q;
        }
    }
    return best_q;
}

}  // namespace far
