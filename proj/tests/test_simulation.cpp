#include <doctest.h>

#include <cmath>

#include "far/errors.hpp"
#include "far/simulation.hpp"

using namespace far;

TEST_CASE("generator determinism") {
    const SimConfig cfg{Scenario::Linear, 10, 3, 2, 40, 0.5, 1.0, 99, 1};
    Rng t1(1), t2(1);
    const SimTruth truth1 = make_truth(cfg, t1);
    const SimTruth truth2 = make_truth(cfg, t2);
    for (int j = 0; j < cfg.p; ++j)
        CHECK((truth1.eta[static_cast<std::size_t>(j)] - truth2.eta[static_cast<std::size_t>(j)]).isZero(0.0));
    Rng g1(7), g2(7);
    const auto d1 = generate_dataset(cfg, truth1, g1);
    const auto d2 = generate_dataset(cfg, truth2, g2);
    CHECK((d1.y - d2.y).isZero(0.0));
    for (int j = 0; j < cfg.p; ++j)
        CHECK((d1.curves[static_cast<std::size_t>(j)] - d2.curves[static_cast<std::size_t>(j)]).isZero(0.0));
}

TEST_CASE("noiseless linear responses equal the index sums theta^T eta") {
    SimConfig cfg{Scenario::Linear, 8, 3, 2, 200, 0.0, 0.0, 5, 1};
    Rng tr(3);
    const SimTruth truth = make_truth(cfg, tr);
    Rng g(4);
    const auto data = generate_dataset(cfg, truth, g);
    const Eigen::VectorXd raw = data.y.array() + data.response_mean;

    // recover theta by projecting the noiseless in-span curves
    const BasisSystem basis = make_basis(BasisKind::Fourier, 4, data.grid);
    for (int i = 0; i < cfg.n; ++i) {
        double expect = 0.0;
        for (int j = 0; j < cfg.s; ++j) {
            const auto s = project_curves(data, basis, j);
            expect += s.scores.row(i) * truth.eta[static_cast<std::size_t>(j)];
        }
        CHECK(std::abs(raw(i) - expect) <= 1e-3 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("nonlinear scenario applies g1(u) = u and g2(u) = -u + sin u") {
    SimConfig cfg{Scenario::Nonlinear, 12, 2, 2, 120, 0.0, 0.0, 11, 1};
    Rng tr(8);
    const SimTruth truth = make_truth(cfg, tr);
    Rng g(9);
    const auto data = generate_dataset(cfg, truth, g);
    const Eigen::VectorXd raw = data.y.array() + data.response_mean;

    const Eigen::MatrixXd bgen = make_basis(BasisKind::Fourier, 4, data.grid).values;
    for (int i = 0; i < cfg.n; ++i) {
        double u[2];
        for (int j = 0; j < 2; ++j) {
            const Eigen::VectorXd beta = bgen.transpose() * truth.eta[static_cast<std::size_t>(j)];
            const Eigen::VectorXd x = data.curves[static_cast<std::size_t>(j)].row(i).transpose();
            u[j] = (data.grid.weights.array() * beta.array() * x.array()).sum();
        }
        const double expect = u[0] + (-u[1] + std::sin(u[1]));
        CHECK(std::abs(raw(i) - expect) <= 1e-10 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("nonlinear scenario rejects s != 2") {
    SimConfig cfg{Scenario::Nonlinear, 12, 4, 3, 40, 0.5, 0.5, 1, 1};
    CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("selection metrics") {
    SimConfig cfg{Scenario::Linear, 10, 10, 4, 40, 0.5, 1.0, 1, 1};
    Rng tr(2);
    const SimTruth truth = make_truth(cfg, tr);

    SUBCASE("perfect recovery") {
        const auto r = evaluate_selection({0, 1, 2, 3}, truth, 10);
        CHECK(r.fnr == 0.0);
        CHECK(r.fpr == 0.0);
    }
    SUBCASE("one miss, one false positive") {
        const auto r = evaluate_selection({0, 1, 2, 4}, truth, 10);
        CHECK(r.fnr == doctest::Approx(0.25));
        CHECK(r.fpr == doctest::Approx(1.0 / 6.0));
    }
    SUBCASE("the empty model misses everything") {
        const auto r = evaluate_selection({}, truth, 10);
        CHECK(r.fnr == 1.0);
        CHECK(r.fpr == 0.0);
    }
}

TEST_CASE("prediction error of the null model is the variance-like baseline") {
    SimConfig cfg{Scenario::Linear, 60, 2, 1, 50, 0.5, 1.0, 21, 1};
    Rng tr(1);
    const SimTruth truth = make_truth(cfg, tr);
    Rng gtr(2), gte(3);
    const auto train = generate_dataset(cfg, truth, gtr);
    const auto test = generate_dataset(cfg, truth, gte);

    LinearFarModel null_model;
    null_model.basis_kind = BasisKind::OrthoCubicSpline;
    null_model.q = 4;
    null_model.grid_points.assign(train.grid.points.data(), train.grid.points.data() + train.grid.size());
    null_model.response_mean = train.response_mean;
    for (int j = 0; j < cfg.p; ++j) {
        null_model.eta.push_back(Eigen::VectorXd::Zero(4));
        null_model.score_offsets.push_back(Eigen::RowVectorXd::Zero(4));
    }
    const double pe = evaluate_pe(null_model, test);
    const Eigen::VectorXd raw = test.y.array() + test.response_mean;
    double expect = 0.0;
    for (int i = 0; i < raw.size(); ++i) expect += std::pow(raw(i) - train.response_mean, 2);
    expect /= static_cast<double>(raw.size());
    CHECK(pe == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("run_study plumbing") {
    SimConfig cfg{Scenario::Linear, 24, 3, 2, 40, 0.5, 1.0, 31, 2};
    StudySettings settings;
    settings.method.penalty = PenaltySpec{PenaltyFamily::Lasso, 0.0, 3.7};
    settings.method.lambda_grid = 10;
    settings.rule.q_candidates = {4, 5};

    const StudyResult result = run_study(cfg, settings);
    CHECK(result.failures == 0);
    CHECK(result.records.size() == 2);
    const std::string csv = study_csv(result);
    CHECK(csv.find("scenario,n,p,s,sigma_y,method,FN,FP,meanPE,sePE\n") == 0);
    CHECK(csv.find("linear_lasso") != std::string::npos);
    const std::string jsonl = study_jsonl(result);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);

    SUBCASE("reruns are byte-identical") {
        const StudyResult again = run_study(cfg, settings);
        CHECK(study_csv(again) == csv);
        CHECK(study_jsonl(again) == jsonl);
    }
    SUBCASE("a single replicate records zero standard error") {
        SimConfig one = cfg;
        one.replicates = 1;
        const StudyResult r1 = run_study(one, settings);
        CHECK(r1.metrics.se_pe == 0.0);
    }
    SUBCASE("threads do not change the aggregates") {
        StudySettings threaded = settings;
        threaded.threads = 4;
        const StudyResult par = run_study(cfg, threaded);
        CHECK(study_csv(par) == csv);
        CHECK(study_jsonl(par) == jsonl);
    }
}

TEST_CASE("failed replicates are isolated and counted") {
    SimConfig cfg{Scenario::Linear, 24, 2, 1, 40, 0.5, 1.0, 33, 2};
    StudySettings settings;
    settings.method.penalty = PenaltySpec{PenaltyFamily::Lasso, 0.0, 3.7};
    settings.rule.q_candidates = {50};  // more basis functions than grid points: every replicate fails

    const StudyResult result = run_study(cfg, settings);
    CHECK(result.failures == 2);
    for (const auto& rec : result.records) {
        CHECK(rec.failed);
        CHECK(!rec.error.empty());
    }
    const std::string jsonl = study_jsonl(result);
    CHECK(jsonl.find("\"failed\":true") != std::string::npos);
}
