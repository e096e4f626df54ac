#include "far/linear.hpp"

#include <cmath>

#include "far/errors.hpp"

namespace far {

std::vector<BlockFactor> make_factors(const std::vector<ScoreMatrix>& scores) {
    std::vector<BlockFactor> factors;
    factors.reserve(scores.size());
    for (const auto& s : scores) factors.emplace_back(s.predictor, s.scores);
    return factors;
}

double lambda_max(const std::vector<BlockFactor>& factors, const Eigen::VectorXd& y) {
    const double sqn = std::sqrt(static_cast<double>(y.size()));
    double lmax = 0.0;
    for (const auto& f : factors) lmax = std::max(lmax, f.project(y).norm() / sqn);
    return lmax;
}

std::vector<double> lambda_grid(double lmax, int grid_size, double decades) {
    if (grid_size < 2) throw ConfigError("lambda grid needs at least 2 points");
    std::vector<double> grid(static_cast<std::size_t>(grid_size));
    if (lmax <= 0.0) return grid;  // all zeros: the response is orthogonal to every block
    for (int i = 0; i < grid_size; ++i)
        grid[static_cast<std::size_t>(i)] = lmax * std::pow(10.0, -decades * i / (grid_size - 1));
    return grid;
}

double linear_objective(const Eigen::VectorXd& y, const std::vector<Eigen::VectorXd>& blocks,
                        const PenaltySpec& penalty) {
    const double n = static_cast<double>(y.size());
    Eigen::VectorXd resid = y;
    double pen = 0.0;
    for (const auto& f : blocks) {
        resid -= f;
        pen += rho(penalty, f.norm() / std::sqrt(n));
    }
    return 0.5 * resid.squaredNorm() / n + pen;
}

namespace {

double shrink_coefficient(const PenaltySpec& spec, const Eigen::VectorXd& block, double sqn) {
    if (spec.family == PenaltyFamily::Lasso) return spec.lambda;
    return rho_prime(spec, block.norm() / sqn);
}

bool kkt_pass(const std::vector<BlockFactor>& factors, const Eigen::VectorXd& y,
              const std::vector<Eigen::VectorXd>& blocks, const PenaltySpec& spec, double tol) {
    const double sqn = std::sqrt(static_cast<double>(y.size()));
    Eigen::VectorXd resid = y;
    for (const auto& f : blocks) resid -= f;
    for (std::size_t j = 0; j < factors.size(); ++j) {
        const Eigen::VectorXd rj = resid + blocks[j];
        const double c = shrink_coefficient(spec, blocks[j], sqn);
        if (blocks[j].isZero(0.0)) {
            if (factors[j].project(rj).norm() / sqn > c + tol) return false;
        } else {
            const BlockUpdate upd = block_update(factors[j], rj, c);
            if ((upd.block - blocks[j]).norm() / sqn > tol) return false;
        }
    }
    return true;
}

struct CdResult {
    std::vector<Eigen::VectorXd> blocks;
    int sweeps = 0;
    bool converged = false;
};

CdResult coordinate_descent(const std::vector<BlockFactor>& factors, const Eigen::VectorXd& y,
                            const PenaltySpec& spec, std::vector<Eigen::VectorXd> blocks,
                            const FitOptions& options) {
    const int p = static_cast<int>(factors.size());
    const double sqn = std::sqrt(static_cast<double>(y.size()));
    CdResult out;
    while (out.sweeps < options.max_sweeps) {
        // Rebuild the residual each sweep so rounding cannot accumulate.
        Eigen::VectorXd resid = y;
        for (const auto& f : blocks) resid -= f;
        double max_change = 0.0;
        for (int j = 0; j < p; ++j) {
            auto& fj = blocks[static_cast<std::size_t>(j)];
            const Eigen::VectorXd rj = resid + fj;
            const double c = shrink_coefficient(spec, fj, sqn);
            BlockUpdate upd = block_update(factors[static_cast<std::size_t>(j)], rj, c);
            max_change = std::max(max_change, (upd.block - fj).norm() / sqn);
            resid = rj - upd.block;
            fj = std::move(upd.block);
        }
        ++out.sweeps;
        if (max_change <= options.tol && kkt_pass(factors, y, blocks, spec, options.tol)) {
            out.converged = true;
            break;
        }
    }
    out.blocks = std::move(blocks);
    return out;
}

}  // namespace

LinearFarModel fit_at_lambda(const std::vector<BlockFactor>& factors, const Eigen::VectorXd& y,
                             const PenaltySpec& penalty, const LinearFarModel* init,
                             const FitOptions& options) {
    validate(penalty);
    if (!y.allFinite()) throw InputError("non-finite response");
    const int n = static_cast<int>(y.size());
    const int p = static_cast<int>(factors.size());
    for (const auto& f : factors)
        if (f.n() != n) throw InputError("score matrices and response disagree on n");

    std::vector<Eigen::VectorXd> blocks;
    if (init != nullptr && static_cast<int>(init->fitted_blocks.size()) == p &&
        (p == 0 || init->fitted_blocks.front().size() == n)) {
        blocks = init->fitted_blocks;
    } else {
        blocks.assign(static_cast<std::size_t>(p), Eigen::VectorXd::Zero(n));
    }

    int sweeps = 0;
    if (penalty.family == PenaltyFamily::Scad) {
        bool cold = true;
        for (const auto& f : blocks)
            if (!f.isZero(0.0)) cold = false;
        if (cold) {
            PenaltySpec lasso = penalty;
            lasso.family = PenaltyFamily::Lasso;
            CdResult pre = coordinate_descent(factors, y, lasso, std::move(blocks), options);
            blocks = std::move(pre.blocks);
            sweeps += pre.sweeps;
        }
    }

    CdResult cd = coordinate_descent(factors, y, penalty, std::move(blocks), options);

    LinearFarModel model;
    model.lambda = penalty.lambda;
    model.penalty = penalty;
    model.sweeps = sweeps + cd.sweeps;
    model.converged = cd.converged;
    model.eta.reserve(static_cast<std::size_t>(p));
    model.score_offsets.reserve(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        const auto& fj = cd.blocks[static_cast<std::size_t>(j)];
        if (!fj.allFinite()) throw Error("non-finite fitted block");
        model.eta.push_back(factors[static_cast<std::size_t>(j)].coef_from_block(fj));
        model.score_offsets.push_back(factors[static_cast<std::size_t>(j)].column_means());
        if (fj.norm() > 0.0) model.active_set.push_back(factors[static_cast<std::size_t>(j)].predictor());
    }
    model.objective = linear_objective(y, cd.blocks, penalty);
    model.fitted_blocks = std::move(cd.blocks);
    return model;
}

LinearFarModel fit_at_lambda(const std::vector<ScoreMatrix>& scores, const Eigen::VectorXd& y,
                             const PenaltySpec& penalty, const LinearFarModel* init,
                             const FitOptions& options) {
    const auto factors = make_factors(scores);
    LinearFarModel model = fit_at_lambda(factors, y, penalty, init, options);
    if (!scores.empty()) model.q = scores.front().q;
    return model;
}

FitPath lambda_path(const std::vector<BlockFactor>& factors, const Eigen::VectorXd& y,
                    const PenaltySpec& penalty, const std::vector<double>& grid,
                    const FitOptions& options) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] > grid[i - 1]) throw ConfigError("lambda grid must be non-increasing");
    FitPath path;
    path.lambdas = grid;
    path.models.reserve(grid.size());
    const LinearFarModel* prev = nullptr;
    for (double l : grid) {
        path.models.push_back(fit_at_lambda(factors, y, penalty.with_lambda(l), prev, options));
        prev = &path.models.back();
    }
    return path;
}

FitPath lambda_path(const std::vector<ScoreMatrix>& scores, const Eigen::VectorXd& y,
                    const PenaltySpec& penalty, int grid_size, const FitOptions& options) {
    const auto factors = make_factors(scores);
    FitPath path = lambda_path(factors, y, penalty, lambda_grid(lambda_max(factors, y), grid_size), options);
    for (auto& m : path.models)
        if (!scores.empty()) m.q = scores.front().q;
    return path;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<int>(rows.size()), m.cols());
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) out.row(i) = m.row(rows[static_cast<std::size_t>(i)]);
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<int>(idx.size()));
    for (int i = 0; i < static_cast<int>(idx.size()); ++i) out(i) = v(idx[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<ScoreMatrix> wrap_designs(const std::vector<Eigen::MatrixXd>& designs) {
    std::vector<ScoreMatrix> out;
    out.reserve(designs.size());
    for (int j = 0; j < static_cast<int>(designs.size()); ++j)
        out.push_back(ScoreMatrix{j, static_cast<int>(designs[static_cast<std::size_t>(j)].cols()),
                                  designs[static_cast<std::size_t>(j)]});
    return out;
}

}  // namespace

CvCurve cross_validate_path(const std::vector<Eigen::MatrixXd>& designs, const Eigen::VectorXd& y,
                            const PenaltySpec& penalty, int grid_size,
                            const std::vector<std::vector<int>>& folds, const FitOptions& options) {
    const int n = static_cast<int>(y.size());
    CvCurve out;
    std::vector<BlockFactor> full;
    full.reserve(designs.size());
    for (int j = 0; j < static_cast<int>(designs.size()); ++j)
        full.emplace_back(j, designs[static_cast<std::size_t>(j)]);
    double lmax = lambda_max(full, y);

    std::vector<std::vector<int>> train_rows(folds.size());
    std::vector<std::vector<BlockFactor>> fold_factors(folds.size());
    std::vector<Eigen::VectorXd> fold_y(folds.size());
    std::vector<double> fold_mean(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<char> held(static_cast<std::size_t>(n), 0);
        for (int i : folds[f]) held[static_cast<std::size_t>(i)] = 1;
        for (int i = 0; i < n; ++i)
            if (!held[static_cast<std::size_t>(i)]) train_rows[f].push_back(i);
        if (train_rows[f].empty()) throw ConfigError("cross-validation fold leaves no training rows");
        Eigen::VectorXd ytr = take(y, train_rows[f]);
        fold_mean[f] = ytr.mean();
        fold_y[f] = ytr.array() - fold_mean[f];
        fold_factors[f].reserve(designs.size());
        for (int j = 0; j < static_cast<int>(designs.size()); ++j)
            fold_factors[f].emplace_back(j, take_rows(designs[static_cast<std::size_t>(j)], train_rows[f]));
        lmax = std::max(lmax, lambda_max(fold_factors[f], fold_y[f]));
    }

    out.grid = lambda_grid(lmax, grid_size);
    out.full_path = lambda_path(full, y, penalty, out.grid, options);
    out.cv_error.assign(out.grid.size(), 0.0);
    out.fold_mse.assign(out.grid.size(), std::vector<double>(folds.size(), 0.0));

    for (std::size_t f = 0; f < folds.size(); ++f) {
        FitPath path = lambda_path(fold_factors[f], fold_y[f], penalty, out.grid, options);
        std::vector<Eigen::MatrixXd> held_designs;
        held_designs.reserve(designs.size());
        for (int j = 0; j < static_cast<int>(designs.size()); ++j)
            held_designs.push_back(take_rows(designs[static_cast<std::size_t>(j)], folds[f]));
        const auto held_scores = wrap_designs(held_designs);
        const Eigen::VectorXd yheld = take(y, folds[f]);
        for (std::size_t i = 0; i < path.models.size(); ++i) {
            path.models[i].response_mean = fold_mean[f];
            const Eigen::VectorXd pred = predict_from_scores(path.models[i], held_scores);
            out.fold_mse[i][f] = (pred - yheld).squaredNorm() / static_cast<double>(yheld.size());
        }
    }
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
        double s = 0.0;
        for (double e : out.fold_mse[i]) s += e;
        out.cv_error[i] = s / static_cast<double>(folds.size());
        if (out.cv_error[i] < out.cv_error[static_cast<std::size_t>(out.chosen)])
            out.chosen = static_cast<int>(i);
    }
    return out;
}

Eigen::VectorXd predict_from_scores(const LinearFarModel& model, const std::vector<ScoreMatrix>& scores) {
    if (static_cast<int>(scores.size()) != model.p())
        throw InputError("prediction scores disagree with the model's predictor count");
    const int m = scores.empty() ? 0 : static_cast<int>(scores.front().scores.rows());
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(m, model.response_mean);
    for (int j = 0; j < model.p(); ++j) {
        const auto& eta = model.eta[static_cast<std::size_t>(j)];
        if (eta.size() == 0 || eta.isZero(0.0)) continue;
        const auto& s = scores[static_cast<std::size_t>(j)].scores;
        if (s.cols() != eta.size()) throw InputError("prediction scores disagree with the model's basis dimension");
        pred += (s.rowwise() - model.score_offsets[static_cast<std::size_t>(j)]) * eta;
    }
    return pred;
}

namespace {

void check_grid_match(const std::vector<double>& model_grid, const TimeGrid& grid) {
    if (model_grid.empty()) throw ConfigError("model carries no training grid");
    if (static_cast<int>(model_grid.size()) != grid.size())
        throw InputError("new curves are not sampled on the model's training grid");
    for (int k = 0; k < grid.size(); ++k)
        if (std::abs(model_grid[static_cast<std::size_t>(k)] - grid.points(k)) > 1e-12)
            throw InputError("new curves are not sampled on the model's training grid");
}

}  // namespace

Eigen::VectorXd predict_linear(const LinearFarModel& model, const FunctionalDataset& data) {
    check_grid_match(model.grid_points, data.grid);
    if (data.p() != model.p()) throw InputError("new dataset predictor count differs from the model");
    const BasisSystem basis = make_basis(model.basis_kind, model.q, data.grid);
    return predict_from_scores(model, project_all(data, basis));
}

LinearFarModel fit_linear(const FunctionalDataset& data, BasisKind kind, int q,
                          const PenaltySpec& penalty, double lambda, const FitOptions& options) {
    const BasisSystem basis = make_basis(kind, q, data.grid);
    const auto scores = project_all(data, basis);
    LinearFarModel model = fit_at_lambda(scores, data.y, penalty.with_lambda(lambda), nullptr, options);
    model.basis_kind = kind;
    model.q = q;
    model.grid_points.assign(data.grid.points.data(), data.grid.points.data() + data.grid.size());
    model.response_mean = data.response_mean;
    return model;
}

}  // namespace far
