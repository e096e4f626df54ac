#include <doctest.h>

#include <cmath>
#include <set>

#include "far/errors.hpp"
#include "far/simulation.hpp"
#include "far/tuning.hpp"

using namespace far;

TEST_CASE("fold construction") {
    SUBCASE("n = 40, k = 20 gives 20 folds of size 2 partitioning the indices") {
        const auto folds = make_folds(40, 20, 123);
        REQUIRE(folds.size() == 20);
        std::set<int> seen;
        for (const auto& f : folds) {
            CHECK(f.size() == 2);
            for (int i : f) seen.insert(i);
        }
        CHECK(seen.size() == 40);
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == 39);
    }
    SUBCASE("fold sizes differ by at most one") {
        const auto folds = make_folds(23, 5, 9);
        std::size_t lo = 23, hi = 0;
        for (const auto& f : folds) {
            lo = std::min(lo, f.size());
            hi = std::max(hi, f.size());
        }
        CHECK(hi - lo <= 1);
    }
    SUBCASE("same seed, same folds") {
        CHECK(make_folds(31, 4, 7) == make_folds(31, 4, 7));
        CHECK(make_folds(31, 4, 7) != make_folds(31, 4, 8));
    }
    SUBCASE("k out of range throws") {
        CHECK_THROWS_AS(make_folds(19, 20, 0), ConfigError);
        CHECK_THROWS_AS(make_folds(19, 1, 0), ConfigError);
    }
}

TEST_CASE("cell_better implements the tie-break rules") {
    const SurfaceCell small_l{5, -1, 0.1, 1.0};
    const SurfaceCell big_l{5, -1, 0.4, 1.0};
    CHECK(cell_better(big_l, small_l, TieBreak::Sparsest));
    CHECK(cell_better(small_l, big_l, TieBreak::Densest));
    const SurfaceCell lower_err{9, 9, 0.01, 0.5};
    CHECK(cell_better(lower_err, big_l, TieBreak::Sparsest));
    const SurfaceCell small_q{5, -1, 0.4, 1.0};
    const SurfaceCell big_q{6, -1, 0.4, 1.0};
    CHECK(cell_better(small_q, big_q, TieBreak::Sparsest));
    CHECK(cell_better(big_q, small_q, TieBreak::Densest));
}

namespace {

struct Sim {
    FunctionalDataset train, valid;
    SimTruth truth;
};

Sim small_sim(std::uint64_t seed, int n = 40, int p = 3, int s = 2) {
    const SimConfig cfg{Scenario::Linear, n, p, s, 50, 0.5, 1.0, seed, 1};
    Rng tr(derive_seed(seed, 1)), g1(derive_seed(seed, 2)), g2(derive_seed(seed, 3));
    Sim out;
    out.truth = make_truth(cfg, tr);
    out.train = generate_dataset(cfg, out.truth, g1);
    out.valid = generate_dataset(cfg, out.truth, g2);
    return out;
}

}  // namespace

TEST_CASE("validation tuning scans the full surface and returns its argmin") {
    const Sim sim = small_sim(101);
    MethodSpec method;
    method.penalty = PenaltySpec{PenaltyFamily::Lasso, 0.0, 3.7};
    method.lambda_grid = 25;
    TuningRule rule;
    rule.q_candidates = {4, 5};

    const TuningReport rep = tune_validation(sim.train, sim.valid, method, rule);
    CHECK(rep.surface.size() == 2 * 25);
    REQUIRE(rep.chosen_linear.has_value());
    CHECK(rep.chosen_linear->q == rep.q);
    CHECK(rep.chosen_linear->lambda == rep.lambda);

    // the chosen cell beats or ties every recorded cell under the tie-break
    SurfaceCell chosen{rep.q, rep.d, rep.lambda, 0.0};
    for (const auto& cell : rep.surface)
        if (cell.q == rep.q && cell.d == rep.d && cell.lambda == rep.lambda) chosen = cell;
    for (const auto& cell : rep.surface) CHECK(!cell_better(cell, chosen, rule.tie));
}

TEST_CASE("fits inside validation tuning never read validation responses") {
    const Sim sim = small_sim(103);
    MethodSpec method;
    method.penalty = PenaltySpec{PenaltyFamily::Lasso, 0.0, 3.7};
    method.lambda_grid = 15;
    TuningRule rule;
    rule.q_candidates = {4};

    const TuningReport rep = tune_validation(sim.train, sim.valid, method, rule);

    // permuting the validation responses changes errors only; the model the
    // tuner fitted at run 1's chosen cell is reproduced by fitting on the
    // training set alone
    FunctionalDataset shuffled = sim.valid;
    Eigen::VectorXd perm = shuffled.y.reverse();
    shuffled.y = perm;
    const TuningReport rep2 = tune_validation(sim.train, shuffled, method, rule);
    bool any_error_changed = false;
    for (std::size_t i = 0; i < rep.surface.size(); ++i) {
        CHECK(rep.surface[i].lambda == rep2.surface[i].lambda);
        if (rep.surface[i].error != rep2.surface[i].error) any_error_changed = true;
    }
    CHECK(any_error_changed);

    const BasisSystem basis = make_basis(method.basis, rep.q, sim.train.grid);
    const auto scores = project_all(sim.train, basis);
    const auto factors = make_factors(scores);
    const auto grid = lambda_grid(lambda_max(factors, sim.train.y), method.lambda_grid);
    const FitPath path = lambda_path(factors, sim.train.y, method.penalty, grid, method.fit);
    bool found = false;
    for (std::size_t i = 0; i < path.models.size(); ++i) {
        if (grid[i] != rep.lambda) continue;
        found = true;
        for (int j = 0; j < 3; ++j)
            CHECK((path.models[i].eta[static_cast<std::size_t>(j)] -
                   rep.chosen_linear->eta[static_cast<std::size_t>(j)]).isZero(0.0));
    }
    CHECK(found);
}

TEST_CASE("cross-validation tuning") {
    const Sim sim = small_sim(107, 30, 2, 1);
    MethodSpec method;
    method.penalty = PenaltySpec{PenaltyFamily::Lasso, 0.0, 3.7};
    method.lambda_grid = 12;
    TuningRule rule;
    rule.mode = TuneMode::KFoldCV;
    rule.k = 5;
    rule.seed = 42;
    rule.q_candidates = {4};

    const TuningReport rep = tune_cv(sim.train, method, rule);
    CHECK(rep.surface.size() == 12);
    CHECK(rep.fold_errors.size() == rep.surface.size());
    REQUIRE(rep.chosen_linear.has_value());

    SUBCASE("determinism") {
        const TuningReport again = tune_cv(sim.train, method, rule);
        CHECK(again.lambda == rep.lambda);
        CHECK(again.q == rep.q);
        for (std::size_t i = 0; i < rep.surface.size(); ++i)
            CHECK(again.surface[i].error == rep.surface[i].error);
    }

    SUBCASE("the empty-model cell equals the fold-mean baseline") {
        // cell 0 is the largest lambda: every fold model is empty there
        const auto folds = make_folds(30, 5, 42);
        const Eigen::VectorXd raw = sim.train.y.array() + sim.train.response_mean;
        double expect = 0.0;
        for (const auto& fold : folds) {
            double train_sum = 0.0;
            int train_count = 0;
            std::set<int> held(fold.begin(), fold.end());
            for (int i = 0; i < 30; ++i)
                if (!held.count(i)) {
                    train_sum += raw(i);
                    ++train_count;
                }
            const double m = train_sum / train_count;
            double sse = 0.0;
            for (int i : fold) sse += (raw(i) - m) * (raw(i) - m);
            expect += sse / static_cast<double>(fold.size());
        }
        expect /= static_cast<double>(folds.size());
        CHECK(rep.surface[0].error == doctest::Approx(expect).epsilon(1e-10));
    }

    SUBCASE("k > n throws") {
        TuningRule bad = rule;
        bad.k = 31;
        CHECK_THROWS_AS(tune_cv(sim.train, method, bad), ConfigError);
    }
}

TEST_CASE("holdout q selection") {
    SUBCASE("curves in a 4-dimensional Fourier span select q = 4") {
        const TimeGrid grid = uniform_grid(200);
        const BasisSystem b4 = make_basis(BasisKind::Fourier, 4, grid);
        Rng rng(301);
        const int n = 12;
        Eigen::MatrixXd curves(n, grid.size());
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd coef(4);
            for (int l = 0; l < 4; ++l) coef(l) = rng.normal();
            curves.row(i) = b4.synthesize(coef).transpose();
            for (int k = 0; k < grid.size(); ++k) curves(i, k) += 0.01 * rng.normal();
        }
        const auto data = make_dataset(grid, {curves}, Eigen::VectorXd::Zero(n));
        const int q = holdout_q_selection(data, 0.2, {4, 5, 6, 7, 8, 9, 10}, BasisKind::Fourier, 5);
        CHECK(q == 4);
    }

    SUBCASE("white-noise curves select the smallest candidate in most seeds") {
        const TimeGrid grid = uniform_grid(200);
        int smallest = 0;
        const int seeds = 100;
        const int n = 12, p = 2;
        for (int s = 0; s < seeds; ++s) {
            Rng rng(1000 + static_cast<std::uint64_t>(s));
            std::vector<Eigen::MatrixXd> curves(p, Eigen::MatrixXd(n, grid.size()));
            for (auto& c : curves)
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < grid.size(); ++k) c(i, k) = rng.normal();
            const auto data = make_dataset(grid, curves, Eigen::VectorXd::Zero(n));
            const int q = holdout_q_selection(data, 0.2, {4, 7, 10}, BasisKind::OrthoCubicSpline,
                                              static_cast<std::uint64_t>(s));
            if (q == 4) ++smallest;
        }
        CHECK(smallest >= 90);
    }

    SUBCASE("capacity and fraction validation") {
        const TimeGrid grid = uniform_grid(200);
        Eigen::MatrixXd curves = Eigen::MatrixXd::Zero(2, 200);
        const auto data = make_dataset(grid, {curves}, Eigen::VectorXd::Zero(2));
        // fraction 0.2 of 200 points holds out 40, leaving 160
        CHECK_THROWS_AS(holdout_q_selection(data, 0.2, {161}, BasisKind::Fourier, 0), ConfigError);
        CHECK_NOTHROW(holdout_q_selection(data, 0.2, {4}, BasisKind::Fourier, 0));
        CHECK_THROWS_AS(holdout_q_selection(data, 0.0, {4}, BasisKind::Fourier, 0), ConfigError);
        CHECK_THROWS_AS(holdout_q_selection(data, 0.6, {4}, BasisKind::Fourier, 0), ConfigError);
    }
}
