// far: fit, predict, tune, and simulate functional additive regression
// models from CSV data and JSON configs.
//
// Exit codes: 0 success, 2 malformed input, 3 invalid configuration,
// 4 non-convergence under --strict.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "far/csv.hpp"
#include "far/errors.hpp"
#include "far/model_io.hpp"
#include "far/simulation.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNotConverged = 4;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    json j = far::load_json(path);
    if (!j.is_object()) throw far::ConfigError("config file must hold a JSON object: " + path);
    return j;
}

// CLI flags win over config values; config values win over defaults.
template <typename T>
T resolve(const json& cfg, const std::string& key, const std::optional<T>& flag, const T& fallback) {
    if (flag.has_value()) return *flag;
    if (cfg.contains(key)) {
        try {
            return cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw far::ConfigError("config field '" + key + "': " + e.what());
        }
    }
    return fallback;
}

template <typename T>
T require(const json& cfg, const std::string& key, const std::optional<T>& flag) {
    if (flag.has_value()) return *flag;
    if (cfg.contains(key)) {
        try {
            return cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw far::ConfigError("config field '" + key + "': " + e.what());
        }
    }
    throw far::ConfigError("missing required setting: " + key);
}

far::FunctionalDataset dataset_from_files(const far::CurveTable& table, const std::string& response_path) {
    const Eigen::VectorXd raw = far::read_response_csv(response_path, table.curve_ids);
    return far::make_dataset(table.grid, table.curves, raw);
}

std::vector<std::string> active_ids(const std::vector<int>& active, const std::vector<std::string>& ids) {
    std::vector<std::string> out;
    for (int j : active) out.push_back(ids[static_cast<std::size_t>(j)]);
    return out;
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> curves, response, out;
    std::optional<std::uint64_t> seed;
    bool strict = false;
};

far::MethodSpec method_from_config(const json& cfg, const std::optional<std::string>& penalty_flag,
                                   bool nonlinear) {
    far::MethodSpec method;
    method.nonlinear = nonlinear;
    method.penalty = far::parse_penalty(resolve<std::string>(cfg, "penalty", penalty_flag, "lasso"));
    method.basis =
        far::basis_kind_from_string(resolve<std::string>(cfg, "basis", std::nullopt, "ortho_cubic_spline"));
    method.lambda_grid = resolve<int>(cfg, "lambda_grid", std::nullopt, 100);
    method.threshold = resolve<bool>(cfg, "threshold", std::nullopt, false);
    method.nl.lambda_grid = method.lambda_grid;
    return method;
}

int run_fit(const CommonFlags& flags, const std::optional<std::string>& penalty_flag,
            const std::optional<double>& lambda_flag, const std::optional<int>& q_flag,
            const std::optional<int>& d_flag, const std::optional<std::string>& method_flag) {
    const json cfg = load_config(flags.config_path);
    const std::string curves_path = require<std::string>(cfg, "curves", flags.curves);
    const std::string response_path = require<std::string>(cfg, "response", flags.response);
    const std::string out_path = require<std::string>(cfg, "out", flags.out);
    const std::string method_name = resolve<std::string>(cfg, "method", method_flag, "linear");
    if (method_name != "linear" && method_name != "nonlinear")
        throw far::ConfigError("method must be 'linear' or 'nonlinear'");
    const bool nonlinear = method_name == "nonlinear";
    const double lambda = require<double>(cfg, "lambda", lambda_flag);
    if (lambda < 0.0) throw far::ConfigError("lambda must be >= 0");
    const int q = require<int>(cfg, "q", q_flag);
    if (q < 1) throw far::ConfigError("q must be >= 1");

    const far::MethodSpec method = method_from_config(cfg, penalty_flag, nonlinear);
    const far::CurveTable table = far::read_curves_csv(curves_path);
    const far::FunctionalDataset data = dataset_from_files(table, response_path);

    json summary;
    summary["command"] = "fit";
    summary["method"] = method_name;
    json model_json;
    bool converged = true;

    if (!nonlinear) {
        const far::LinearFarModel model = far::fit_linear(data, method.basis, q, method.penalty, lambda);
        converged = model.converged;
        model_json = far::model_to_json(model);
        Eigen::VectorXd fitted = Eigen::VectorXd::Constant(data.n(), model.response_mean);
        for (const auto& f : model.fitted_blocks) fitted += f;
        summary["lambda"] = model.lambda;
        summary["q"] = model.q;
        summary["active_set"] = active_ids(model.active_set, table.predictor_ids);
        summary["objective"] = model.objective;
        summary["sweeps"] = model.sweeps;
        summary["converged"] = model.converged;
        summary["fitted_values"] = std::vector<double>(fitted.data(), fitted.data() + fitted.size());
    } else {
        const int d = require<int>(cfg, "d", d_flag);
        if (d < 4) throw far::ConfigError("d must be >= 4");
        const far::BasisSystem basis = far::make_basis(method.basis, q, data.grid);
        const auto scores = far::project_all(data, basis);
        far::NonlinearFarModel model = far::fit_nonlinear(data, basis, scores, d, method.penalty,
                                                          far::LambdaRule::fixed(lambda), method.nl);
        if (method.threshold) model = far::threshold_model(model, model.lambda, &data.y);
        converged = model.converged;
        model_json = far::model_to_json(model);
        Eigen::VectorXd fitted = Eigen::VectorXd::Constant(data.n(), model.response_mean);
        for (const auto& f : model.fitted_blocks) fitted += f;
        summary["lambda"] = model.lambda;
        summary["q"] = model.q;
        summary["d"] = model.d;
        summary["active_set"] = active_ids(model.active_set, table.predictor_ids);
        summary["objective"] = model.objective;
        summary["outer_iterations"] = model.outer_iterations;
        summary["converged"] = model.converged;
        summary["fitted_values"] = std::vector<double>(fitted.data(), fitted.data() + fitted.size());
    }

    model_json["predictor_ids"] = table.predictor_ids;
    far::save_json(out_path, model_json);
    summary["model"] = out_path;
    std::cout << summary.dump(2) << "\n";
    if (flags.strict && !converged) return kExitNotConverged;
    return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& curves_path, const std::string& out_path) {
    const json mj = far::load_json(model_path);
    const far::LoadedModel loaded = far::model_from_json(mj);
    far::CurveTable table = far::read_curves_csv(curves_path);

    // align predictors with the training order when the model records ids
    if (mj.contains("predictor_ids")) {
        const auto want = mj.at("predictor_ids").get<std::vector<std::string>>();
        std::vector<Eigen::MatrixXd> ordered;
        ordered.reserve(want.size());
        for (const auto& id : want) {
            bool found = false;
            for (std::size_t j = 0; j < table.predictor_ids.size(); ++j) {
                if (table.predictor_ids[j] == id) {
                    ordered.push_back(table.curves[j]);
                    found = true;
                    break;
                }
            }
            if (!found) throw far::InputError("curve CSV is missing predictor_id '" + id + "'");
        }
        table.curves = std::move(ordered);
        table.predictor_ids = want;
    }

    const far::FunctionalDataset data =
        far::make_dataset(table.grid, table.curves, Eigen::VectorXd::Zero(static_cast<int>(table.curve_ids.size())));
    const Eigen::VectorXd pred = loaded.linear ? far::predict_linear(*loaded.linear, data)
                                               : far::predict_nonlinear(*loaded.nonlinear, data);
    far::write_predictions_csv(out_path, table.curve_ids, pred);
    json summary;
    summary["command"] = "predict";
    summary["rows"] = static_cast<int>(table.curve_ids.size());
    summary["out"] = out_path;
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int run_tune(const CommonFlags& flags, const std::optional<std::string>& penalty_flag) {
    const json cfg = load_config(flags.config_path);
    const std::string curves_path = require<std::string>(cfg, "curves", flags.curves);
    const std::string response_path = require<std::string>(cfg, "response", flags.response);
    const std::string out_path = require<std::string>(cfg, "out", flags.out);
    const std::string method_name = resolve<std::string>(cfg, "method", std::nullopt, "linear");
    const bool nonlinear = method_name == "nonlinear";
    const far::MethodSpec method = method_from_config(cfg, penalty_flag, nonlinear);

    far::TuningRule rule;
    const std::string mode = resolve<std::string>(cfg, "mode", std::nullopt, "validation");
    if (mode == "validation")
        rule.mode = far::TuneMode::ValidationSet;
    else if (mode == "cv")
        rule.mode = far::TuneMode::KFoldCV;
    else
        throw far::ConfigError("mode must be 'validation' or 'cv'");
    rule.k = resolve<int>(cfg, "k", std::nullopt, 20);
    rule.q_candidates = resolve<std::vector<int>>(cfg, "q_candidates", std::nullopt, {});
    rule.d_candidates = resolve<std::vector<int>>(cfg, "d_candidates", std::nullopt, {});
    const std::string tie = resolve<std::string>(cfg, "tie_break", std::nullopt, "sparsest");
    if (tie == "sparsest")
        rule.tie = far::TieBreak::Sparsest;
    else if (tie == "densest")
        rule.tie = far::TieBreak::Densest;
    else
        throw far::ConfigError("tie_break must be 'sparsest' or 'densest'");
    rule.seed = resolve<std::uint64_t>(cfg, "seed", flags.seed, 0);

    const far::CurveTable table = far::read_curves_csv(curves_path);
    const far::FunctionalDataset data = dataset_from_files(table, response_path);

    far::TuningReport report;
    if (rule.mode == far::TuneMode::ValidationSet) {
        const std::string vc = require<std::string>(cfg, "valid_curves", std::nullopt);
        const std::string vr = require<std::string>(cfg, "valid_response", std::nullopt);
        const far::CurveTable vtable = far::read_curves_csv(vc);
        const far::FunctionalDataset valid = dataset_from_files(vtable, vr);
        report = far::tune_validation(data, valid, method, rule);
    } else {
        report = far::tune_cv(data, method, rule);
    }

    far::save_json(out_path, far::report_to_json(report));
    json chosen;
    chosen["command"] = "tune";
    chosen["lambda"] = report.lambda;
    chosen["q"] = report.q;
    if (report.d >= 0) chosen["d"] = report.d;
    chosen["report"] = out_path;
    std::cout << chosen.dump(2) << "\n";
    return kExitOk;
}

int run_simulate(const CommonFlags& flags, const std::optional<int>& threads_flag,
                 const std::optional<std::string>& log_flag) {
    const json cfg = load_config(flags.config_path);
    far::SimConfig sim;
    sim.scenario = far::scenario_from_string(resolve<std::string>(cfg, "scenario", std::nullopt, "linear"));
    sim.n = resolve<int>(cfg, "n", std::nullopt, sim.n);
    sim.p = resolve<int>(cfg, "p", std::nullopt, sim.p);
    sim.s = resolve<int>(cfg, "s", std::nullopt, sim.scenario == far::Scenario::Nonlinear ? 2 : sim.s);
    sim.T = resolve<int>(cfg, "T", std::nullopt, sim.T);
    sim.sigma_x = resolve<double>(cfg, "sigma_x", std::nullopt, sim.sigma_x);
    sim.sigma_y = resolve<double>(cfg, "sigma_y", std::nullopt, sim.sigma_y);
    sim.seed = resolve<std::uint64_t>(cfg, "seed", flags.seed, sim.seed);
    sim.replicates = resolve<int>(cfg, "replicates", std::nullopt, sim.replicates);
    far::validate(sim);

    far::StudySettings settings;
    const json mcfg = cfg.value("method", json::object());
    const std::string model = mcfg.value("model", sim.scenario == far::Scenario::Nonlinear ? "nonlinear" : "linear");
    settings.method = method_from_config(mcfg, std::nullopt, model == "nonlinear");
    const json tcfg = cfg.value("tuning", json::object());
    const std::string mode = tcfg.value("mode", "validation");
    settings.rule.mode = mode == "cv" ? far::TuneMode::KFoldCV : far::TuneMode::ValidationSet;
    settings.rule.k = tcfg.value("k", 20);
    settings.rule.q_candidates = tcfg.value("q_candidates", std::vector<int>{5, 6, 7, 8, 9, 10});
    settings.rule.d_candidates =
        tcfg.value("d_candidates", settings.method.nonlinear ? std::vector<int>{5, 6, 7, 8, 9, 10}
                                                             : std::vector<int>{});
    settings.holdout_fraction = cfg.value("holdout_fraction", 0.2);
    settings.threads = threads_flag.has_value() ? *threads_flag : cfg.value("threads", 1);

    const far::StudyResult result = far::run_study(sim, settings);

    const std::string out_path = require<std::string>(cfg, "out", flags.out);
    far::atomic_write_text(out_path, far::study_csv(result));
    const std::string log_path = log_flag.has_value() ? *log_flag : cfg.value("log", "");
    if (!log_path.empty()) far::atomic_write_text(log_path, far::study_jsonl(result));

    json summary;
    summary["command"] = "simulate";
    summary["method"] = result.method_label;
    summary["replicates"] = sim.replicates;
    summary["failures"] = result.failures;
    summary["FN"] = result.metrics.fnr;
    summary["FP"] = result.metrics.fpr;
    summary["meanPE"] = result.metrics.mean_pe;
    summary["sePE"] = result.metrics.se_pe;
    summary["out"] = out_path;
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional additive regression"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::optional<std::string> penalty_flag, method_flag, model_flag, log_flag;
    std::optional<double> lambda_flag;
    std::optional<int> q_flag, d_flag, threads_flag;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", flags.config_path, "JSON config file");
        cmd->add_option_function<std::string>("--curves", [&](const std::string& v) { flags.curves = v; },
                                              "curve CSV path");
        cmd->add_option_function<std::string>("--response", [&](const std::string& v) { flags.response = v; },
                                              "response CSV path");
        cmd->add_option_function<std::string>("--out", [&](const std::string& v) { flags.out = v; },
                                              "output path");
        cmd->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { flags.seed = v; }, "seed");
    };

    CLI::App* fit = app.add_subcommand("fit", "fit a model at a fixed lambda");
    add_common(fit);
    fit->add_option_function<std::string>("--penalty", [&](const std::string& v) { penalty_flag = v; },
                                          "lasso | scad | scad:a=<v>");
    fit->add_option_function<std::string>("--method", [&](const std::string& v) { method_flag = v; },
                                          "linear | nonlinear");
    fit->add_option_function<double>("--lambda", [&](double v) { lambda_flag = v; }, "penalty level");
    fit->add_option_function<int>("--q", [&](int v) { q_flag = v; }, "basis dimension");
    fit->add_option_function<int>("--d", [&](int v) { d_flag = v; }, "link basis dimension");
    fit->add_flag("--strict", flags.strict, "exit 4 on non-convergence");

    CLI::App* predict = app.add_subcommand("predict", "predict with a saved model");
    std::string pred_model, pred_curves, pred_out;
    predict->add_option("--model", pred_model, "model JSON")->required();
    predict->add_option("--curves", pred_curves, "curve CSV")->required();
    predict->add_option("--out", pred_out, "prediction CSV")->required();

    CLI::App* tune = app.add_subcommand("tune", "select lambda and dimensions");
    add_common(tune);
    tune->add_option_function<std::string>("--penalty", [&](const std::string& v) { penalty_flag = v; },
                                           "lasso | scad | scad:a=<v>");

    CLI::App* simulate = app.add_subcommand("simulate", "run a replicated simulation study");
    add_common(simulate);
    simulate->add_option_function<int>("--threads", [&](int v) { threads_flag = v; }, "worker threads");
    simulate->add_option_function<std::string>("--log", [&](const std::string& v) { log_flag = v; },
                                               "per-replicate JSONL path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (fit->parsed()) return run_fit(flags, penalty_flag, lambda_flag, q_flag, d_flag, method_flag);
        if (predict->parsed()) return run_predict(pred_model, pred_curves, pred_out);
        if (tune->parsed()) return run_tune(flags, penalty_flag);
        if (simulate->parsed()) return run_simulate(flags, threads_flag, log_flag);
    } catch (const far::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const far::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitConfig;
}
