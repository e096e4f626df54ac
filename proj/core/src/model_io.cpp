#include "far/model_io.hpp"

#include <fstream>

#include "far/csv.hpp"
#include "far/errors.hpp"

namespace far {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json rowvec_to_json(const Eigen::RowVectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
    Eigen::VectorXd v(static_cast<int>(a.size()));
    for (int i = 0; i < v.size(); ++i) v(i) = a.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

Eigen::RowVectorXd rowvec_from_json(const json& a) {
    Eigen::RowVectorXd v(static_cast<int>(a.size()));
    for (int i = 0; i < v.size(); ++i) v(i) = a.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

json penalty_to_json(const PenaltySpec& p) {
    json j;
    j["family"] = penalty_family_string(p);
    if (p.family == PenaltyFamily::Scad) j["a"] = p.scad_a;
    return j;
}

PenaltySpec penalty_from_json(const json& j, double lambda) {
    PenaltySpec p;
    p.family = j.at("family").get<std::string>() == "scad" ? PenaltyFamily::Scad : PenaltyFamily::Lasso;
    if (j.contains("a")) p.scad_a = j.at("a").get<double>();
    p.lambda = lambda;
    return p;
}

void common_to_json(json& j, const LinearFarModel& m) {
    j["format"] = "far-model";
    j["version"] = 1;
    j["basis"] = {{"kind", to_string(m.basis_kind)}, {"q", m.q}};
    j["grid"] = m.grid_points;
    j["response_mean"] = m.response_mean;
    j["lambda"] = m.lambda;
    j["penalty"] = penalty_to_json(m.penalty);
    json eta = json::array(), offsets = json::array();
    for (const auto& e : m.eta) eta.push_back(vec_to_json(e));
    for (const auto& o : m.score_offsets) offsets.push_back(rowvec_to_json(o));
    j["eta"] = std::move(eta);
    j["score_offsets"] = std::move(offsets);
    j["active_set"] = m.active_set;
    j["objective"] = m.objective;
    j["converged"] = m.converged;
}

}  // namespace

json model_to_json(const LinearFarModel& model) {
    json j;
    common_to_json(j, model);
    j["method"] = "linear";
    j["sweeps"] = model.sweeps;
    return j;
}

json model_to_json(const NonlinearFarModel& model) {
    json j;
    j["format"] = "far-model";
    j["version"] = 1;
    j["method"] = "nonlinear";
    j["basis"] = {{"kind", to_string(model.basis_kind)}, {"q", model.q}};
    j["d"] = model.d;
    j["grid"] = model.grid_points;
    j["response_mean"] = model.response_mean;
    j["lambda"] = model.lambda;
    j["penalty"] = penalty_to_json(model.penalty);
    json eta = json::array(), xi = json::array(), offsets = json::array(), links = json::array();
    for (const auto& e : model.eta) eta.push_back(vec_to_json(e));
    for (const auto& x : model.xi) xi.push_back(vec_to_json(x));
    for (const auto& o : model.h_offsets) offsets.push_back(rowvec_to_json(o));
    for (int j2 = 0; j2 < model.p(); ++j2) {
        if (!model.link_valid[static_cast<std::size_t>(j2)]) {
            links.push_back(json{{"valid", false}});
            continue;
        }
        const auto& b = model.link[static_cast<std::size_t>(j2)];
        json knots = json::array();
        for (int k = 0; k < b.knots().size(); ++k) knots.push_back(b.knots()(k));
        links.push_back(json{{"valid", true}, {"lo", b.lo()}, {"hi", b.hi()}, {"knots", std::move(knots)}});
    }
    j["eta"] = std::move(eta);
    j["xi"] = std::move(xi);
    j["h_offsets"] = std::move(offsets);
    j["link"] = std::move(links);
    j["block_norms"] = model.block_norms;
    j["active_set"] = model.active_set;
    j["objective"] = model.objective;
    j["selection_criterion"] = model.selection_criterion;
    j["outer_iterations"] = model.outer_iterations;
    j["converged"] = model.converged;
    return j;
}

LoadedModel model_from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "far-model")
        throw InputError("not a far model document");
    const std::string method = j.at("method").get<std::string>();
    LoadedModel out;
    if (method == "linear") {
        LinearFarModel m;
        m.basis_kind = basis_kind_from_string(j.at("basis").at("kind").get<std::string>());
        m.q = j.at("basis").at("q").get<int>();
        m.grid_points = j.at("grid").get<std::vector<double>>();
        m.response_mean = j.at("response_mean").get<double>();
        m.lambda = j.at("lambda").get<double>();
        m.penalty = penalty_from_json(j.at("penalty"), m.lambda);
        for (const auto& e : j.at("eta")) m.eta.push_back(vec_from_json(e));
        for (const auto& o : j.at("score_offsets")) m.score_offsets.push_back(rowvec_from_json(o));
        m.active_set = j.at("active_set").get<std::vector<int>>();
        m.objective = j.at("objective").get<double>();
        m.sweeps = j.at("sweeps").get<int>();
        m.converged = j.at("converged").get<bool>();
        out.linear = std::move(m);
        return out;
    }
    if (method == "nonlinear") {
        NonlinearFarModel m;
        m.basis_kind = basis_kind_from_string(j.at("basis").at("kind").get<std::string>());
        m.q = j.at("basis").at("q").get<int>();
        m.d = j.at("d").get<int>();
        m.grid_points = j.at("grid").get<std::vector<double>>();
        m.response_mean = j.at("response_mean").get<double>();
        m.lambda = j.at("lambda").get<double>();
        m.penalty = penalty_from_json(j.at("penalty"), m.lambda);
        for (const auto& e : j.at("eta")) m.eta.push_back(vec_from_json(e));
        for (const auto& x : j.at("xi")) m.xi.push_back(vec_from_json(x));
        for (const auto& o : j.at("h_offsets")) m.h_offsets.push_back(rowvec_from_json(o));
        for (const auto& l : j.at("link")) {
            if (!l.at("valid").get<bool>()) {
                m.link.emplace_back();
                m.link_valid.push_back(0);
                continue;
            }
            m.link.push_back(
                BSplineBasis::uniform(l.at("lo").get<double>(), l.at("hi").get<double>(), m.d));
            m.link_valid.push_back(1);
        }
        m.block_norms = j.at("block_norms").get<std::vector<double>>();
        m.active_set = j.at("active_set").get<std::vector<int>>();
        m.objective = j.at("objective").get<double>();
        m.selection_criterion = j.at("selection_criterion").get<double>();
        m.outer_iterations = j.at("outer_iterations").get<int>();
        m.converged = j.at("converged").get<bool>();
        out.nonlinear = std::move(m);
        return out;
    }
    throw InputError("unknown model method: " + method);
}

json report_to_json(const TuningReport& report) {
    json j;
    j["format"] = "far-tuning-report";
    j["version"] = 1;
    json chosen;
    chosen["lambda"] = report.lambda;
    chosen["q"] = report.q;
    if (report.d >= 0) chosen["d"] = report.d;
    j["chosen"] = std::move(chosen);
    json surface = json::array();
    for (const auto& cell : report.surface) {
        json c;
        c["q"] = cell.q;
        if (cell.d >= 0) c["d"] = cell.d;
        c["lambda"] = cell.lambda;
        c["error"] = cell.error;
        surface.push_back(std::move(c));
    }
    j["surface"] = std::move(surface);
    if (!report.fold_errors.empty()) j["fold_errors"] = report.fold_errors;
    return j;
}

void save_json(const std::string& path, const json& j) { atomic_write_text(path, j.dump(2) + "\n"); }

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open JSON file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("cannot parse JSON file " + path + ": " + e.what());
    }
    return j;
}

}  // namespace far
