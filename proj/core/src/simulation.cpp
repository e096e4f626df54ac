#include "far/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "far/basis.hpp"
#include "far/errors.hpp"
#include "far/parallel.hpp"

namespace far {

std::string to_string(Scenario s) { return s == Scenario::Linear ? "linear" : "nonlinear"; }

Scenario scenario_from_string(const std::string& s) {
    if (s == "linear") return Scenario::Linear;
    if (s == "nonlinear") return Scenario::Nonlinear;
    throw ConfigError("unknown scenario: " + s);
}

void validate(const SimConfig& config) {
    if (config.n < 2) throw ConfigError("simulation needs n >= 2");
    if (config.p < 1) throw ConfigError("simulation needs p >= 1");
    if (config.s < 0 || config.s > config.p) throw ConfigError("simulation needs 0 <= s <= p");
    if (config.T < 2) throw ConfigError("simulation needs T >= 2");
    if (config.sigma_x < 0.0 || config.sigma_y < 0.0) throw ConfigError("noise levels must be >= 0");
    if (config.replicates < 1) throw ConfigError("simulation needs replicates >= 1");
    if (config.scenario == Scenario::Nonlinear && config.s != 2)
        throw ConfigError("the nonlinear scenario uses exactly 2 signal predictors");
}

namespace {

constexpr int kTruthDim = 4;

double link_value(Scenario scenario, int signal_index, double u) {
    if (scenario == Scenario::Linear) return u;
    if (signal_index == 0) return u;
    return -u + std::sin(u);
}

}  // namespace

SimTruth make_truth(const SimConfig& config, Rng& rng) {
    validate(config);
    SimTruth truth;
    truth.eta.assign(static_cast<std::size_t>(config.p), Eigen::VectorXd::Zero(kTruthDim));
    for (int j = 0; j < config.s; ++j) {
        Eigen::VectorXd eta(kTruthDim);
        for (int l = 0; l < kTruthDim; ++l) eta(l) = rng.normal();
        truth.eta[static_cast<std::size_t>(j)] = eta / eta.norm();
        truth.signal_set.push_back(j);
    }
    return truth;
}

FunctionalDataset generate_dataset(const SimConfig& config, const SimTruth& truth, Rng& rng) {
    validate(config);
    if (static_cast<int>(truth.eta.size()) != config.p)
        throw ConfigError("truth does not match the configured predictor count");
    const TimeGrid grid = uniform_grid(config.T);
    // The 4-dimensional Fourier family, orthonormalized under the grid
    // quadrature: with theta ~ N(0, I) on these coordinates the noiseless
    // index integral equals theta^T eta up to quadrature precision.
    const Eigen::MatrixXd bgen = make_basis(BasisKind::Fourier, kTruthDim, grid).values;

    // draw order: per predictor the theta block then the noise block, then
    // the response noise; all row-major
    std::vector<Eigen::MatrixXd> curves;
    curves.reserve(static_cast<std::size_t>(config.p));
    Eigen::VectorXd f_sum = Eigen::VectorXd::Zero(config.n);
    for (int j = 0; j < config.p; ++j) {
        Eigen::MatrixXd theta(config.n, kTruthDim);
        for (int i = 0; i < config.n; ++i)
            for (int l = 0; l < kTruthDim; ++l) theta(i, l) = rng.normal();
        Eigen::MatrixXd X = theta * bgen;
        if (config.sigma_x > 0.0) {
            for (int i = 0; i < config.n; ++i)
                for (int k = 0; k < config.T; ++k) X(i, k) += config.sigma_x * rng.normal();
        }
        if (j < config.s) {
            const Eigen::VectorXd beta =
                bgen.transpose() * truth.eta[static_cast<std::size_t>(j)];  // beta_j on the grid
            const Eigen::VectorXd u = X * grid.weights.cwiseProduct(beta);
            for (int i = 0; i < config.n; ++i) f_sum(i) += link_value(config.scenario, j, u(i));
        }
        curves.push_back(std::move(X));
    }
    Eigen::VectorXd y = f_sum;
    if (config.sigma_y > 0.0)
        for (int i = 0; i < config.n; ++i) y(i) += config.sigma_y * rng.normal();
    return make_dataset(grid, std::move(curves), y);
}

SelectionRates evaluate_selection(const std::vector<int>& active_set, const SimTruth& truth, int p) {
    const int s = static_cast<int>(truth.signal_set.size());
    std::vector<char> active(static_cast<std::size_t>(p), 0);
    for (int j : active_set)
        if (j >= 0 && j < p) active[static_cast<std::size_t>(j)] = 1;
    int missed = 0, noise_in = 0;
    for (int j = 0; j < p; ++j) {
        const bool is_signal = j < s;
        if (is_signal && !active[static_cast<std::size_t>(j)]) ++missed;
        if (!is_signal && active[static_cast<std::size_t>(j)]) ++noise_in;
    }
    SelectionRates rates;
    rates.fnr = s > 0 ? static_cast<double>(missed) / s : 0.0;
    rates.fpr = p > s ? static_cast<double>(noise_in) / (p - s) : 0.0;
    return rates;
}

double evaluate_pe(const LinearFarModel& model, const FunctionalDataset& test) {
    const Eigen::VectorXd raw = test.y.array() + test.response_mean;
    const Eigen::VectorXd pred = predict_linear(model, test);
    return (pred - raw).squaredNorm() / static_cast<double>(raw.size());
}

double evaluate_pe(const NonlinearFarModel& model, const FunctionalDataset& test) {
    const Eigen::VectorXd raw = test.y.array() + test.response_mean;
    const Eigen::VectorXd pred = predict_nonlinear(model, test);
    return (pred - raw).squaredNorm() / static_cast<double>(raw.size());
}

namespace {

double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 4) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

double pairwise_mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return pairwise_sum(v, 0, v.size()) / static_cast<double>(v.size());
}

ReplicateRecord run_replicate(const SimConfig& config, const StudySettings& settings, int r) {
    ReplicateRecord rec;
    rec.replicate = r;
    rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
    Rng rng_truth(derive_seed(rec.seed, 1));
    Rng rng_train(derive_seed(rec.seed, 2));
    Rng rng_valid(derive_seed(rec.seed, 3));
    Rng rng_test(derive_seed(rec.seed, 4));

    const SimTruth truth = make_truth(config, rng_truth);
    const FunctionalDataset train = generate_dataset(config, truth, rng_train);
    const FunctionalDataset valid = generate_dataset(config, truth, rng_valid);
    const FunctionalDataset test = generate_dataset(config, truth, rng_test);

    TuningRule rule = settings.rule;
    rule.seed = derive_seed(rec.seed, 6);

    if (!settings.method.nonlinear) {
        const TuningReport report = rule.mode == TuneMode::ValidationSet
                                        ? tune_validation(train, valid, settings.method, rule)
                                        : tune_cv(train, settings.method, rule);
        const LinearFarModel& model = *report.chosen_linear;
        rec.lambda = model.lambda;
        rec.q = model.q;
        rec.active_set = model.active_set;
        rec.pe = evaluate_pe(model, test);
    } else {
        const int q = holdout_q_selection(train, settings.holdout_fraction, rule.q_candidates,
                                          settings.method.basis, derive_seed(rec.seed, 5));
        TuningRule narrowed = rule;
        narrowed.q_candidates = {q};
        const TuningReport report = rule.mode == TuneMode::ValidationSet
                                        ? tune_validation(train, valid, settings.method, narrowed)
                                        : tune_cv(train, settings.method, narrowed);
        const NonlinearFarModel& model = *report.chosen_nonlinear;
        rec.lambda = model.lambda;
        rec.q = model.q;
        rec.d = model.d;
        rec.active_set = model.active_set;
        rec.pe = evaluate_pe(model, test);
    }
    const SelectionRates rates = evaluate_selection(rec.active_set, truth, config.p);
    rec.fn = rates.fnr;
    rec.fp = rates.fpr;
    return rec;
}

}  // namespace

std::string study_method_label(const StudySettings& settings) {
    std::string label = settings.method.nonlinear ? "nonlinear" : "linear";
    label += "_" + penalty_family_string(settings.method.penalty);
    if (settings.method.nonlinear && settings.method.threshold) label += "_thresholded";
    return label;
}

StudyResult run_study(const SimConfig& config, const StudySettings& settings) {
    validate(config);
    StudyResult result;
    result.config = config;
    result.method_label = study_method_label(settings);
    result.records.resize(static_cast<std::size_t>(config.replicates));

    parallel_for(config.replicates, std::max(1, settings.threads), [&](int r) {
        try {
            result.records[static_cast<std::size_t>(r)] = run_replicate(config, settings, r);
        } catch (const std::exception& e) {
            ReplicateRecord rec;
            rec.replicate = r;
            rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
            rec.failed = true;
            rec.error = e.what();
            result.records[static_cast<std::size_t>(r)] = std::move(rec);
        }
    });

    std::vector<double> fns, fps, pes;
    for (const auto& rec : result.records) {
        if (rec.failed) {
            ++result.failures;
            continue;
        }
        fns.push_back(rec.fn);
        fps.push_back(rec.fp);
        pes.push_back(rec.pe);
    }
    result.metrics.fnr = pairwise_mean(fns);
    result.metrics.fpr = pairwise_mean(fps);
    result.metrics.mean_pe = pairwise_mean(pes);
    if (pes.size() > 1) {
        std::vector<double> sq(pes.size());
        for (std::size_t i = 0; i < pes.size(); ++i) {
            const double d = pes[i] - result.metrics.mean_pe;
            sq[i] = d * d;
        }
        const double var = pairwise_sum(sq, 0, sq.size()) / static_cast<double>(pes.size() - 1);
        result.metrics.se_pe = std::sqrt(var / static_cast<double>(pes.size()));
    }
    return result;
}

std::string study_csv(const StudyResult& result) {
    char line[512];
    std::string out = "scenario,n,p,s,sigma_y,method,FN,FP,meanPE,sePE\n";
    std::snprintf(line, sizeof(line), "%s,%d,%d,%d,%.6f,%s,%.6f,%.6f,%.6f,%.6f\n",
                  to_string(result.config.scenario).c_str(), result.config.n, result.config.p,
                  result.config.s, result.config.sigma_y, result.method_label.c_str(),
                  result.metrics.fnr, result.metrics.fpr, result.metrics.mean_pe, result.metrics.se_pe);
    out += line;
    return out;
}

std::string study_jsonl(const StudyResult& result) {
    std::string out;
    for (const auto& rec : result.records) {
        nlohmann::json j;
        j["replicate"] = rec.replicate;
        j["seed"] = rec.seed;
        j["failed"] = rec.failed;
        if (rec.failed) {
            j["error"] = rec.error;
        } else {
            j["lambda"] = rec.lambda;
            j["q"] = rec.q;
            if (rec.d >= 0) j["d"] = rec.d;
            j["active_set"] = rec.active_set;
            j["fn"] = rec.fn;
            j["fp"] = rec.fp;
            j["pe"] = rec.pe;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace far
