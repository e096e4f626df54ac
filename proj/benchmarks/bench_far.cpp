#include <benchmark/benchmark.h>

#include "far/basis.hpp"
#include "far/linear.hpp"
#include "far/nonlinear.hpp"
#include "far/rng.hpp"
#include "far/scores.hpp"

namespace {

struct Bench {
    std::vector<far::ScoreMatrix> scores;
    Eigen::VectorXd y;
};

Bench make_instance(int n, int p, int q) {
    far::Rng rng(42);
    Bench b;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < p; ++j) {
        Eigen::MatrixXd theta(n, q);
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < q; ++l) theta(i, l) = rng.normal();
        if (j < 3) {
            Eigen::VectorXd coef(q);
            for (int l = 0; l < q; ++l) coef(l) = rng.normal();
            y += theta * coef;
        }
        b.scores.push_back(far::ScoreMatrix{j, q, std::move(theta)});
    }
    for (int i = 0; i < n; ++i) y(i) += 0.5 * rng.normal();
    b.y = y.array() - y.mean();
    return b;
}

void BM_BlockUpdate(benchmark::State& state) {
    const Bench b = make_instance(static_cast<int>(state.range(0)), 1, 6);
    const far::BlockFactor factor(0, b.scores[0].scores);
    for (auto _ : state) benchmark::DoNotOptimize(far::block_update(factor, b.y, 0.05));
}
BENCHMARK(BM_BlockUpdate)->Arg(60)->Arg(200)->Arg(1000);

void BM_LassoPath(benchmark::State& state) {
    const Bench b = make_instance(80, static_cast<int>(state.range(0)), 6);
    const far::PenaltySpec pen{far::PenaltyFamily::Lasso, 0.0, 3.7};
    for (auto _ : state) benchmark::DoNotOptimize(far::lambda_path(b.scores, b.y, pen, 50));
}
BENCHMARK(BM_LassoPath)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ScadPath(benchmark::State& state) {
    const Bench b = make_instance(80, static_cast<int>(state.range(0)), 6);
    const far::PenaltySpec pen{far::PenaltyFamily::Scad, 0.0, 3.7};
    for (auto _ : state) benchmark::DoNotOptimize(far::lambda_path(b.scores, b.y, pen, 50));
}
BENCHMARK(BM_ScadPath)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_BSplineEval(benchmark::State& state) {
    const far::BSplineBasis basis = far::BSplineBasis::uniform(-2.0, 2.0, static_cast<int>(state.range(0)));
    far::Rng rng(7);
    for (auto _ : state) benchmark::DoNotOptimize(basis.eval(4.0 * rng.uniform() - 2.0));
}
BENCHMARK(BM_BSplineEval)->Arg(4)->Arg(7)->Arg(10);

void BM_LinkDesign(benchmark::State& state) {
    far::Rng rng(9);
    const int n = static_cast<int>(state.range(0));
    Eigen::MatrixXd theta(n, 6);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < 6; ++l) theta(i, l) = rng.normal();
    Eigen::VectorXd eta = far::normalized_direction(Eigen::VectorXd::Ones(6));
    for (auto _ : state) benchmark::DoNotOptimize(far::build_link_design(theta, eta, 7));
}
BENCHMARK(BM_LinkDesign)->Arg(100)->Arg(500);

void BM_ProjectCurves(benchmark::State& state) {
    const far::TimeGrid grid = far::uniform_grid(200);
    const far::BasisSystem basis = far::make_basis(far::BasisKind::OrthoCubicSpline, 7, grid);
    far::Rng rng(11);
    const int n = static_cast<int>(state.range(0));
    Eigen::MatrixXd curves(n, 200);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < 200; ++k) curves(i, k) = rng.normal();
    const auto data = far::make_dataset(grid, {curves}, Eigen::VectorXd::Zero(n));
    for (auto _ : state) benchmark::DoNotOptimize(far::project_curves(data, basis, 0));
}
BENCHMARK(BM_ProjectCurves)->Arg(60)->Arg(100);

}  // namespace
