#include "far/nonlinear.hpp"

#include <cmath>
#include <limits>

#include "far/errors.hpp"
#include "far/folds.hpp"

namespace far {

Eigen::VectorXd normalized_direction(const Eigen::VectorXd& v) {
    const double norm = v.norm();
    if (!(norm > 0.0)) return Eigen::VectorXd::Zero(v.size());
    Eigen::VectorXd u = v / norm;
    for (int i = 0; i < u.size(); ++i) {
        if (u(i) != 0.0) {
            if (u(i) < 0.0) u = -u;
            break;
        }
    }
    return u;
}

namespace {

int argmin_first(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[static_cast<std::size_t>(i)] < v[static_cast<std::size_t>(best)]) best = i;
    return best;
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

std::vector<Eigen::VectorXd> init_eta(const std::vector<ScoreMatrix>& scores, const Eigen::VectorXd& y,
                                      const PenaltySpec& penalty, const LambdaRule& rule,
                                      double response_mean,
                                      const std::vector<ScoreMatrix>* validation_scores,
                                      const Eigen::VectorXd* validation_raw_y,
                                      const NonlinearOptions& options) {
    const auto factors = make_factors(scores);
    LinearFarModel chosen;
    if (rule.kind == LambdaRule::Kind::Fixed) {
        chosen = fit_at_lambda(factors, y, penalty.with_lambda(rule.fixed_lambda), nullptr, options.inner);
    } else if (rule.kind == LambdaRule::Kind::Validation) {
        if (validation_scores == nullptr || validation_raw_y == nullptr)
            throw ConfigError("validation rule needs validation data");
        const auto grid = lambda_grid(lambda_max(factors, y), options.lambda_grid);
        FitPath path = lambda_path(factors, y, penalty, grid, options.inner);
        std::vector<double> err(path.models.size(), 0.0);
        for (std::size_t i = 0; i < path.models.size(); ++i) {
            path.models[i].response_mean = response_mean;
            const Eigen::VectorXd pred = predict_from_scores(path.models[i], *validation_scores);
            err[i] = (pred - *validation_raw_y).squaredNorm() / static_cast<double>(validation_raw_y->size());
        }
        chosen = path.models[static_cast<std::size_t>(argmin_first(err))];
    } else {
        std::vector<Eigen::MatrixXd> designs;
        designs.reserve(scores.size());
        for (const auto& s : scores) designs.push_back(s.scores);
        const auto folds = make_folds(static_cast<int>(y.size()), rule.k, rule.fold_seed);
        CvCurve cv = cross_validate_path(designs, y, penalty, options.lambda_grid, folds, options.inner);
        chosen = cv.full_path.models[static_cast<std::size_t>(cv.chosen)];
    }

    std::vector<Eigen::VectorXd> eta(scores.size());
    for (std::size_t j = 0; j < scores.size(); ++j) {
        const Eigen::VectorXd& coef = chosen.eta[j];
        if (coef.size() > 0 && !coef.isZero(0.0)) {
            eta[j] = normalized_direction(coef);
            continue;
        }
        // unsupervised fallback: leading eigenvector of Theta_j^T Theta_j / n
        const Eigen::MatrixXd& theta = scores[j].scores;
        Eigen::MatrixXd m = theta.transpose() * theta / static_cast<double>(theta.rows());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
        eta[j] = normalized_direction(eig.eigenvectors().col(m.cols() - 1));
    }
    return eta;
}

LinearFarModel fit_xi_step(const std::vector<Eigen::MatrixXd>& link_designs, const Eigen::VectorXd& y,
                           const PenaltySpec& penalty, double lambda, const FitOptions& options) {
    return fit_at_lambda(wrap_designs(link_designs), y, penalty.with_lambda(lambda), nullptr, options);
}

EtaUpdate update_eta_step(const std::vector<ScoreMatrix>& scores,
                          const std::vector<Eigen::VectorXd>& eta_old,
                          const std::vector<Eigen::VectorXd>& xi,
                          const std::vector<BSplineBasis>& links,
                          const std::vector<char>& link_valid,
                          const Eigen::VectorXd& residuals) {
    const int p = static_cast<int>(scores.size());
    const int n = static_cast<int>(residuals.size());
    EtaUpdate out;
    out.eta = eta_old;
    out.delta.assign(static_cast<std::size_t>(p), Eigen::VectorXd());
    for (int j = 0; j < p; ++j)
        out.delta[static_cast<std::size_t>(j)] = Eigen::VectorXd::Zero(eta_old[static_cast<std::size_t>(j)].size());

    std::vector<int> active;
    for (int j = 0; j < p; ++j)
        if (link_valid[static_cast<std::size_t>(j)] && xi[static_cast<std::size_t>(j)].size() > 0 &&
            !xi[static_cast<std::size_t>(j)].isZero(0.0))
            active.push_back(j);
    if (active.empty()) return out;

    const int q = static_cast<int>(eta_old.front().size());
    Eigen::MatrixXd design(n, q * static_cast<int>(active.size()));
    for (std::size_t b = 0; b < active.size(); ++b) {
        const int j = active[b];
        const auto& theta = scores[static_cast<std::size_t>(j)].scores;
        const Eigen::VectorXd idx = theta * eta_old[static_cast<std::size_t>(j)];
        const Eigen::MatrixXd dH = link_deriv_rows(links[static_cast<std::size_t>(j)], idx);
        const Eigen::VectorXd slope = dH * xi[static_cast<std::size_t>(j)];  // h'(u)^T xi per row
        design.middleCols(static_cast<int>(b) * q, q) = theta.array().colwise() * slope.array();
    }

    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd rhs = design.transpose() * residuals;
    Eigen::VectorXd delta = gram.ldlt().solve(rhs);
    if (!delta.allFinite() || (gram * delta - rhs).norm() > 1e-8 * std::max(1.0, rhs.norm())) {
        Eigen::MatrixXd ridged = gram;
        ridged.diagonal().array() += 1e-8;
        delta = ridged.ldlt().solve(rhs);
        out.ridge_regularized = true;
    }

    for (std::size_t b = 0; b < active.size(); ++b) {
        const int j = active[b];
        out.delta[static_cast<std::size_t>(j)] = delta.segment(static_cast<int>(b) * q, q);
        out.eta[static_cast<std::size_t>(j)] =
            normalized_direction(eta_old[static_cast<std::size_t>(j)] + out.delta[static_cast<std::size_t>(j)]);
    }
    return out;
}

double index_objective(const std::vector<ScoreMatrix>& scores, const std::vector<Eigen::VectorXd>& eta,
                       const std::vector<Eigen::VectorXd>& xi, const std::vector<BSplineBasis>& links,
                       const std::vector<char>& link_valid,
                       const std::vector<Eigen::RowVectorXd>& h_offsets, const Eigen::VectorXd& y) {
    Eigen::VectorXd resid = y;
    for (std::size_t j = 0; j < scores.size(); ++j) {
        if (!link_valid[j] || xi[j].size() == 0 || xi[j].isZero(0.0)) continue;
        const Eigen::VectorXd idx = scores[j].scores * eta[j];
        const Eigen::MatrixXd H = link_rows(links[j], idx);
        resid -= (H.rowwise() - h_offsets[j]) * xi[j];
    }
    return resid.squaredNorm();
}

namespace {

struct IterState {
    std::vector<Eigen::VectorXd> eta;
    std::vector<BSplineBasis> links;
    std::vector<char> valid;
    LinearFarModel xi_model;
    double lambda = 0.0;
    double criterion = std::numeric_limits<double>::infinity();
};

}  // namespace

NonlinearFarModel fit_nonlinear(const FunctionalDataset& train, const BasisSystem& basis,
                                const std::vector<ScoreMatrix>& scores, int d,
                                const PenaltySpec& penalty, const LambdaRule& rule,
                                const NonlinearOptions& options,
                                const std::vector<Eigen::VectorXd>* eta_init) {
    if (d < 4) throw ConfigError("link basis needs d >= 4");
    if (scores.empty()) throw ConfigError("fit_nonlinear needs at least one predictor");
    if (options.max_outer < 1) throw ConfigError("fit_nonlinear needs at least one outer iteration");
    const int p = static_cast<int>(scores.size());
    const int n = static_cast<int>(train.y.size());
    const Eigen::VectorXd& y = train.y;

    std::vector<ScoreMatrix> val_scores;
    Eigen::VectorXd val_raw_y;
    if (rule.kind == LambdaRule::Kind::Validation) {
        if (rule.validation == nullptr) throw ConfigError("validation rule needs validation data");
        if (rule.validation->grid.size() != train.grid.size() ||
            (rule.validation->grid.points - train.grid.points).lpNorm<Eigen::Infinity>() > 1e-12)
            throw InputError("validation grid differs from the training grid");
        val_scores = project_all(*rule.validation, basis);
        val_raw_y = rule.validation->y.array() + rule.validation->response_mean;
    }
    std::vector<std::vector<int>> folds;
    if (rule.kind == LambdaRule::Kind::KFoldCV) folds = make_folds(n, rule.k, rule.fold_seed);

    std::vector<Eigen::VectorXd> eta;
    if (eta_init != nullptr) {
        eta = *eta_init;
        for (auto& e : eta) e = normalized_direction(e);
    } else {
        eta = init_eta(scores, y, penalty, rule, train.response_mean,
                       val_scores.empty() ? nullptr : &val_scores,
                       val_scores.empty() ? nullptr : &val_raw_y, options);
    }

    std::vector<Eigen::VectorXd> prev_blocks(static_cast<std::size_t>(p), Eigen::VectorXd::Zero(n));
    IterState best;
    IterState current;
    bool converged = false;
    int outer = 0;
    const LinearFarModel* warm = nullptr;
    LinearFarModel warm_store;

    while (outer < options.max_outer) {
        ++outer;
        // step 1: link designs at the current index vectors
        std::vector<BSplineBasis> links(static_cast<std::size_t>(p));
        std::vector<char> valid(static_cast<std::size_t>(p), 0);
        std::vector<Eigen::MatrixXd> designs(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) {
            const auto& e = eta[static_cast<std::size_t>(j)];
            if (e.isZero(0.0)) {
                designs[static_cast<std::size_t>(j)] = Eigen::MatrixXd::Zero(n, d);
                continue;
            }
            LinkDesign ld = build_link_design(scores[static_cast<std::size_t>(j)].scores, e, d);
            if (ld.degenerate) {
                designs[static_cast<std::size_t>(j)] = Eigen::MatrixXd::Zero(n, d);
            } else {
                links[static_cast<std::size_t>(j)] = ld.basis;
                valid[static_cast<std::size_t>(j)] = 1;
                designs[static_cast<std::size_t>(j)] = std::move(ld.H);
            }
        }

        // step 2: xi over the lambda rule
        LinearFarModel xi_model;
        double chosen_lambda = 0.0;
        double criterion = 0.0;
        if (rule.kind == LambdaRule::Kind::Fixed) {
            xi_model = fit_at_lambda(make_factors(wrap_designs(designs)), y,
                                     penalty.with_lambda(rule.fixed_lambda), warm, options.inner);
            chosen_lambda = rule.fixed_lambda;
            criterion = xi_model.objective;
        } else if (rule.kind == LambdaRule::Kind::Validation) {
            const auto factors = make_factors(wrap_designs(designs));
            const auto grid = lambda_grid(lambda_max(factors, y), options.lambda_grid);
            FitPath path = lambda_path(factors, y, penalty, grid, options.inner);
            // centered validation design rows, fixed across the path
            std::vector<Eigen::MatrixXd> val_centered(static_cast<std::size_t>(p));
            for (int j = 0; j < p; ++j) {
                if (!valid[static_cast<std::size_t>(j)]) continue;
                const Eigen::VectorXd vidx =
                    val_scores[static_cast<std::size_t>(j)].scores * eta[static_cast<std::size_t>(j)];
                val_centered[static_cast<std::size_t>(j)] =
                    link_rows(links[static_cast<std::size_t>(j)], vidx).rowwise() -
                    factors[static_cast<std::size_t>(j)].column_means();
            }
            std::vector<double> err(path.models.size(), 0.0);
            const int m = static_cast<int>(val_raw_y.size());
            for (std::size_t i = 0; i < path.models.size(); ++i) {
                Eigen::VectorXd pred = Eigen::VectorXd::Constant(m, train.response_mean);
                for (int j = 0; j < p; ++j) {
                    const auto& xij = path.models[i].eta[static_cast<std::size_t>(j)];
                    if (!valid[static_cast<std::size_t>(j)] || xij.isZero(0.0)) continue;
                    pred += val_centered[static_cast<std::size_t>(j)] * xij;
                }
                err[i] = (pred - val_raw_y).squaredNorm() / static_cast<double>(m);
            }
            const int idx = argmin_first(err);
            xi_model = path.models[static_cast<std::size_t>(idx)];
            chosen_lambda = grid[static_cast<std::size_t>(idx)];
            criterion = err[static_cast<std::size_t>(idx)];
        } else {
            CvCurve cv = cross_validate_path(designs, y, penalty, options.lambda_grid, folds, options.inner);
            xi_model = cv.full_path.models[static_cast<std::size_t>(cv.chosen)];
            chosen_lambda = cv.grid[static_cast<std::size_t>(cv.chosen)];
            criterion = cv.cv_error[static_cast<std::size_t>(cv.chosen)];
        }

        current = IterState{eta, links, valid, xi_model, chosen_lambda, criterion};
        if (criterion < best.criterion) best = current;

        // convergence on the fitted blocks across outer iterations
        double change = 0.0, base = 0.0;
        for (int j = 0; j < p; ++j) {
            change += (xi_model.fitted_blocks[static_cast<std::size_t>(j)] - prev_blocks[static_cast<std::size_t>(j)])
                          .squaredNorm();
            base += prev_blocks[static_cast<std::size_t>(j)].squaredNorm();
        }
        change /= static_cast<double>(n);
        base /= static_cast<double>(n);
        if (change / std::max(base, 1e-12) <= options.outer_tol) {
            converged = true;
            break;
        }
        prev_blocks = xi_model.fitted_blocks;
        if (outer == options.max_outer) break;

        // step 3: one Taylor update of the index vectors at the selected lambda.
        // The objective is tested at the unnormalized iterate (the quantity the
        // linearization controls); the index model is invariant to rescaling
        // eta because the knot interval rescales with the index values, so the
        // subsequent renormalization is a pure reparameterization.
        Eigen::VectorXd resid = y;
        for (const auto& f : xi_model.fitted_blocks) resid -= f;
        const double j_old = resid.squaredNorm();
        EtaUpdate upd = update_eta_step(scores, eta, xi_model.eta, links, valid, resid);
        for (int halve = 0; halve <= options.max_step_halvings; ++halve) {
            const double scale = std::pow(0.5, halve);
            std::vector<Eigen::VectorXd> eta_try = eta;
            for (int j = 0; j < p; ++j) {
                if (upd.delta[static_cast<std::size_t>(j)].isZero(0.0)) continue;
                eta_try[static_cast<std::size_t>(j)] =
                    eta[static_cast<std::size_t>(j)] + scale * upd.delta[static_cast<std::size_t>(j)];
            }
            const double j_try = index_objective(scores, eta_try, xi_model.eta, links, valid,
                                                 xi_model.score_offsets, y);
            if (j_try <= j_old) {
                for (int j = 0; j < p; ++j)
                    eta[static_cast<std::size_t>(j)] =
                        normalized_direction(eta_try[static_cast<std::size_t>(j)]);
                break;
            }
            // all halvings rejected: keep the old eta
        }

        if (rule.kind == LambdaRule::Kind::Fixed) {
            warm_store = xi_model;
            warm = &warm_store;
        }
    }

    const IterState& fin = converged ? current : best;
    NonlinearFarModel model;
    model.basis_kind = basis.kind;
    model.q = basis.q;
    model.d = d;
    model.grid_points.assign(train.grid.points.data(), train.grid.points.data() + train.grid.size());
    model.response_mean = train.response_mean;
    model.lambda = fin.lambda;
    model.penalty = penalty.with_lambda(fin.lambda);
    model.eta = fin.eta;
    model.xi = fin.xi_model.eta;
    model.link = fin.links;
    model.link_valid = fin.valid;
    model.h_offsets = fin.xi_model.score_offsets;
    model.fitted_blocks = fin.xi_model.fitted_blocks;
    model.active_set = fin.xi_model.active_set;
    model.objective = linear_objective(y, fin.xi_model.fitted_blocks, penalty.with_lambda(fin.lambda));
    model.selection_criterion = fin.criterion;
    model.outer_iterations = outer;
    model.converged = converged;
    const double sqn = std::sqrt(static_cast<double>(n));
    model.block_norms.resize(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j)
        model.block_norms[static_cast<std::size_t>(j)] =
            model.fitted_blocks[static_cast<std::size_t>(j)].norm() / sqn;
    return model;
}

NonlinearFarModel threshold_model(const NonlinearFarModel& model, double lambda, const Eigen::VectorXd* y) {
    NonlinearFarModel out = model;
    out.active_set.clear();
    for (int j = 0; j < model.p(); ++j) {
        if (out.block_norms[static_cast<std::size_t>(j)] > lambda) {
            out.active_set.push_back(j);
            continue;
        }
        out.block_norms[static_cast<std::size_t>(j)] = 0.0;
        if (out.xi[static_cast<std::size_t>(j)].size() > 0) out.xi[static_cast<std::size_t>(j)].setZero();
        if (j < static_cast<int>(out.fitted_blocks.size()) && out.fitted_blocks[static_cast<std::size_t>(j)].size() > 0)
            out.fitted_blocks[static_cast<std::size_t>(j)].setZero();
    }
    if (y != nullptr && !out.fitted_blocks.empty())
        out.objective = linear_objective(*y, out.fitted_blocks, out.penalty);
    return out;
}

Eigen::VectorXd predict_nonlinear_from_scores(const NonlinearFarModel& model,
                                              const std::vector<ScoreMatrix>& scores) {
    if (static_cast<int>(scores.size()) != model.p())
        throw InputError("prediction scores disagree with the model's predictor count");
    const int m = scores.empty() ? 0 : static_cast<int>(scores.front().scores.rows());
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(m, model.response_mean);
    for (int j = 0; j < model.p(); ++j) {
        const auto& xij = model.xi[static_cast<std::size_t>(j)];
        if (!model.link_valid[static_cast<std::size_t>(j)] || xij.size() == 0 || xij.isZero(0.0)) continue;
        if (scores[static_cast<std::size_t>(j)].scores.cols() != model.eta[static_cast<std::size_t>(j)].size())
            throw InputError("prediction scores disagree with the model's basis dimension");
        const Eigen::VectorXd idx = scores[static_cast<std::size_t>(j)].scores * model.eta[static_cast<std::size_t>(j)];
        const Eigen::MatrixXd H = link_rows(model.link[static_cast<std::size_t>(j)], idx);
        pred += (H.rowwise() - model.h_offsets[static_cast<std::size_t>(j)]) * xij;
    }
    return pred;
}

Eigen::VectorXd predict_nonlinear(const NonlinearFarModel& model, const FunctionalDataset& data) {
    if (model.grid_points.empty()) throw ConfigError("model carries no training grid");
    if (static_cast<int>(model.grid_points.size()) != data.grid.size())
        throw InputError("new curves are not sampled on the model's training grid");
    for (int k = 0; k < data.grid.size(); ++k)
        if (std::abs(model.grid_points[static_cast<std::size_t>(k)] - data.grid.points(k)) > 1e-12)
            throw InputError("new curves are not sampled on the model's training grid");
    if (data.p() != model.p()) throw InputError("new dataset predictor count differs from the model");
    const BasisSystem basis = make_basis(model.basis_kind, model.q, data.grid);
    return predict_nonlinear_from_scores(model, project_all(data, basis));
}

}  // namespace far
