#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "far/csv.hpp"
#include "far/errors.hpp"
#include "far/model_io.hpp"
#include "far/simulation.hpp"
#include "mini_schema.hpp"

using namespace far;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("far_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

CurveTable table_from_dataset(const FunctionalDataset& data, double mean) {
    CurveTable t;
    t.grid = data.grid;
    t.curves = data.curves;
    for (int i = 0; i < data.n(); ++i) t.curve_ids.push_back("c" + std::to_string(i));
    for (int j = 0; j < data.p(); ++j) t.predictor_ids.push_back("x" + std::to_string(j));
    (void)mean;
    return t;
}

struct TinyData {
    FunctionalDataset train;
    CurveTable table;
    Eigen::VectorXd raw_y;
};

TinyData tiny_data(std::uint64_t seed, int n = 16, int p = 2) {
    const SimConfig cfg{Scenario::Linear, n, p, 1, 30, 0.5, 0.5, seed, 1};
    Rng tr(derive_seed(seed, 1)), g(derive_seed(seed, 2));
    const SimTruth truth = make_truth(cfg, tr);
    TinyData out;
    out.train = generate_dataset(cfg, truth, g);
    out.table = table_from_dataset(out.train, out.train.response_mean);
    out.raw_y = out.train.y.array() + out.train.response_mean;
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json schema(const std::string& name) {
    return load_json(std::string(FAR_SOURCE_DIR) + "/schemas/" + name);
}

int run_cli(const std::string& args, const fs::path& dir, const std::string& tag) {
    const fs::path out = dir / (tag + ".stdout");
    const fs::path err = dir / (tag + ".stderr");
    const std::string cmd =
        std::string(FAR_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("curve and response CSV round-trips") {
    const fs::path dir = fresh_dir("csv");
    const TinyData data = tiny_data(7);

    const fs::path curves = dir / "curves.csv";
    const fs::path resp = dir / "resp.csv";
    write_curves_csv(curves.string(), data.table);
    write_response_csv(resp.string(), data.table.curve_ids, data.raw_y);

    const CurveTable back = read_curves_csv(curves.string());
    CHECK(back.curve_ids == data.table.curve_ids);
    CHECK(back.predictor_ids == data.table.predictor_ids);
    CHECK((back.grid.points - data.table.grid.points).isZero(0.0));
    for (std::size_t j = 0; j < back.curves.size(); ++j)
        CHECK((back.curves[j] - data.table.curves[j]).isZero(0.0));
    const Eigen::VectorXd y = read_response_csv(resp.string(), back.curve_ids);
    CHECK((y - data.raw_y).isZero(0.0));
}

TEST_CASE("CSV validation errors") {
    const fs::path dir = fresh_dir("csv_bad");
    {
        std::ofstream f(dir / "badheader.csv");
        f << "time,0,1\nc0,x0,1,2\n";
    }
    CHECK_THROWS_AS(read_curves_csv((dir / "badheader.csv").string()), InputError);
    {
        std::ofstream f(dir / "shortrow.csv");
        f << "t,0,0.5,1\nc0,x0,1,2\n";
    }
    CHECK_THROWS_AS(read_curves_csv((dir / "shortrow.csv").string()), InputError);
    {
        std::ofstream f(dir / "resp.csv");
        f << "curve_id,y\nc0,1.5\n";
    }
    CHECK_THROWS_WITH_AS(read_response_csv((dir / "resp.csv").string(), {"c0", "c9"}),
                         doctest::Contains("c9"), InputError);
}

TEST_CASE("emitted JSON validates against the shipped schemas") {
    const TinyData data = tiny_data(13);
    MethodSpec method;
    method.penalty = PenaltySpec{PenaltyFamily::Scad, 0.0, 3.7};
    method.lambda_grid = 8;
    TuningRule rule;
    rule.mode = TuneMode::KFoldCV;
    rule.k = 4;
    rule.q_candidates = {4};
    const TuningReport rep = tune_cv(data.train, method, rule);

    std::string err;
    CHECK_MESSAGE(mini_schema::validate(schema("far_tuning_report.schema.json"), report_to_json(rep), err),
                  err);
    CHECK_MESSAGE(
        mini_schema::validate(schema("far_model.schema.json"), model_to_json(*rep.chosen_linear), err), err);

    // nonlinear model document
    const BasisSystem basis = make_basis(method.basis, 4, data.train.grid);
    const auto scores = project_all(data.train, basis);
    NonlinearOptions opts;
    opts.max_outer = 2;
    opts.lambda_grid = 8;
    const auto nl = fit_nonlinear(data.train, basis, scores, 4, PenaltySpec{PenaltyFamily::Lasso, 0.0, 3.7},
                                  LambdaRule::fixed(0.05), opts);
    CHECK_MESSAGE(mini_schema::validate(schema("far_model.schema.json"), model_to_json(nl), err), err);

    // study record lines
    SimConfig cfg{Scenario::Linear, 14, 2, 1, 25, 0.5, 1.0, 3, 1};
    StudySettings settings;
    settings.method.penalty = PenaltySpec{PenaltyFamily::Lasso, 0.0, 3.7};
    settings.method.lambda_grid = 6;
    settings.rule.q_candidates = {4};
    const StudyResult study = run_study(cfg, settings);
    std::stringstream lines(study_jsonl(study));
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        CHECK_MESSAGE(mini_schema::validate(schema("far_study_record.schema.json"), json::parse(line), err),
                      err);
    }
}

TEST_CASE("cli fit, predict, and error paths") {
    const fs::path dir = fresh_dir("cli");
    const TinyData data = tiny_data(17);
    const fs::path curves = dir / "curves.csv";
    const fs::path resp = dir / "resp.csv";
    write_curves_csv(curves.string(), data.table);
    write_response_csv(resp.string(), data.table.curve_ids, data.raw_y);

    const fs::path model_path = dir / "model.json";
    const std::string fit_args = "fit --curves " + curves.string() + " --response " + resp.string() +
                                 " --out " + model_path.string() + " --penalty scad --lambda 0.05 --q 4";
    REQUIRE(run_cli(fit_args, dir, "fit") == 0);
    REQUIRE(fs::exists(model_path));

    const json summary = json::parse(slurp(dir / "fit.stdout"));
    std::string err;
    CHECK_MESSAGE(mini_schema::validate(schema("far_fit_summary.schema.json"), summary, err), err);
    const json model_doc = load_json(model_path.string());
    CHECK(model_from_json(model_doc).linear.has_value());

    SUBCASE("fit is idempotent on its outputs") {
        const std::string doc1 = slurp(model_path);
        REQUIRE(run_cli(fit_args, dir, "fit2") == 0);
        CHECK(slurp(model_path) == doc1);
    }

    SUBCASE("predictions on the training data match the summary fitted values") {
        const fs::path pred_path = dir / "pred.csv";
        REQUIRE(run_cli("predict --model " + model_path.string() + " --curves " + curves.string() +
                            " --out " + pred_path.string(),
                        dir, "predict") == 0);
        std::ifstream in(pred_path);
        std::string line;
        std::getline(in, line);
        CHECK(line == "curve_id,prediction");
        const auto fitted = summary.at("fitted_values").get<std::vector<double>>();
        int i = 0;
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            CHECK(line.substr(0, comma) == data.table.curve_ids[static_cast<std::size_t>(i)]);
            CHECK(std::abs(std::stod(line.substr(comma + 1)) - fitted[static_cast<std::size_t>(i)]) <= 1e-8);
            ++i;
        }
        CHECK(i == static_cast<int>(data.table.curve_ids.size()));
    }

    SUBCASE("a response missing a curve_id exits 2 and names it") {
        std::vector<std::string> ids = data.table.curve_ids;
        ids.pop_back();
        Eigen::VectorXd y = data.raw_y.head(data.raw_y.size() - 1);
        const fs::path short_resp = dir / "short.csv";
        write_response_csv(short_resp.string(), ids, y);
        const std::string args = "fit --curves " + curves.string() + " --response " + short_resp.string() +
                                 " --out " + (dir / "m2.json").string() + " --lambda 0.05 --q 4";
        CHECK(run_cli(args, dir, "missing") == 2);
        CHECK(slurp(dir / "missing.stderr").find(data.table.curve_ids.back()) != std::string::npos);
    }

    SUBCASE("invalid configuration exits 3") {
        const std::string args = "fit --curves " + curves.string() + " --response " + resp.string() +
                                 " --out " + (dir / "m3.json").string() + " --lambda 0.05 --q 0";
        CHECK(run_cli(args, dir, "badq") == 3);
        CHECK(run_cli("fit", dir, "noargs") == 3);
    }
}

TEST_CASE("cli tune and simulate") {
    const fs::path dir = fresh_dir("cli2");
    const TinyData data = tiny_data(19);
    const fs::path curves = dir / "curves.csv";
    const fs::path resp = dir / "resp.csv";
    write_curves_csv(curves.string(), data.table);
    write_response_csv(resp.string(), data.table.curve_ids, data.raw_y);

    SUBCASE("cv tuning with k > n exits 3") {
        json cfg;
        cfg["curves"] = curves.string();
        cfg["response"] = resp.string();
        cfg["out"] = (dir / "report.json").string();
        cfg["mode"] = "cv";
        cfg["k"] = 20;  // n = 16
        cfg["q_candidates"] = {4};
        save_json((dir / "tune.json").string(), cfg);
        CHECK(run_cli("tune --config " + (dir / "tune.json").string(), dir, "tunebad") == 3);
    }

    SUBCASE("cv tuning emits a report whose chosen cell is the surface argmin") {
        json cfg;
        cfg["curves"] = curves.string();
        cfg["response"] = resp.string();
        cfg["out"] = (dir / "report.json").string();
        cfg["mode"] = "cv";
        cfg["k"] = 4;
        cfg["q_candidates"] = {4, 5};
        cfg["lambda_grid"] = 6;
        save_json((dir / "tune.json").string(), cfg);
        REQUIRE(run_cli("tune --config " + (dir / "tune.json").string(), dir, "tune") == 0);
        const json rep = load_json((dir / "report.json").string());
        const json chosen = json::parse(slurp(dir / "tune.stdout"));
        double best = std::numeric_limits<double>::infinity();
        for (const auto& cell : rep.at("surface")) best = std::min(best, cell.at("error").get<double>());
        bool found = false;
        for (const auto& cell : rep.at("surface"))
            if (cell.at("error").get<double>() == best &&
                cell.at("lambda").get<double>() == chosen.at("lambda").get<double>() &&
                cell.at("q").get<int>() == chosen.at("q").get<int>())
                found = true;
        CHECK(found);
    }

    SUBCASE("simulate writes deterministic outputs") {
        json cfg;
        cfg["scenario"] = "linear";
        cfg["n"] = 14;
        cfg["p"] = 2;
        cfg["s"] = 1;
        cfg["T"] = 25;
        cfg["replicates"] = 2;
        cfg["seed"] = 5;
        cfg["out"] = (dir / "study.csv").string();
        cfg["log"] = (dir / "study.jsonl").string();
        cfg["method"] = {{"model", "linear"}, {"penalty", "lasso"}, {"lambda_grid", 6}};
        cfg["tuning"] = {{"mode", "validation"}, {"q_candidates", {4}}};
        save_json((dir / "sim.json").string(), cfg);
        REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string(), dir, "sim") == 0);
        const std::string csv1 = slurp(dir / "study.csv");
        const std::string log1 = slurp(dir / "study.jsonl");
        CHECK(csv1.find("scenario,n,p,s,sigma_y,method") == 0);
        CHECK(std::count(log1.begin(), log1.end(), '\n') == 2);
        REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string(), dir, "sim2") == 0);
        CHECK(slurp(dir / "study.csv") == csv1);
        CHECK(slurp(dir / "study.jsonl") == log1);
    }

    SUBCASE("invalid scenario parameters exit 3") {
        json cfg;
        cfg["scenario"] = "nonlinear";
        cfg["n"] = 14;
        cfg["p"] = 3;
        cfg["s"] = 3;  // nonlinear needs s == 2
        cfg["T"] = 25;
        cfg["replicates"] = 1;
        cfg["out"] = (dir / "study2.csv").string();
        save_json((dir / "sim_bad.json").string(), cfg);
        CHECK(run_cli("simulate --config " + (dir / "sim_bad.json").string(), dir, "simbad") == 3);
    }
}
