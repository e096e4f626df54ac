#include "far/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "far/errors.hpp"

namespace far {

namespace {

std::vector<std::string> split_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_number(const std::string& cell, const std::string& context) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw InputError("cannot parse number '" + cell + "' in " + context);
    return v;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

CurveTable read_curves_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open curve CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty curve CSV: " + path);
    const auto header = split_line(line);
    if (header.size() < 3 || header[0] != "t")
        throw InputError("curve CSV header must be 't,<grid points>': " + path);
    const int T = static_cast<int>(header.size()) - 1;
    Eigen::VectorXd pts(T);
    for (int k = 0; k < T; ++k)
        pts(k) = parse_number(header[static_cast<std::size_t>(k) + 1], "curve CSV header");
    TimeGrid grid = make_grid(pts);

    std::vector<std::string> curve_ids, predictor_ids;
    std::map<std::string, int> curve_index, predictor_index;
    std::map<std::pair<int, int>, Eigen::VectorXd> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        if (static_cast<int>(cells.size()) != T + 2)
            throw InputError("curve CSV row " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " + std::to_string(T + 2));
        const std::string& cid = cells[0];
        const std::string& pid = cells[1];
        if (curve_index.find(cid) == curve_index.end()) {
            curve_index[cid] = static_cast<int>(curve_ids.size());
            curve_ids.push_back(cid);
        }
        if (predictor_index.find(pid) == predictor_index.end()) {
            predictor_index[pid] = static_cast<int>(predictor_ids.size());
            predictor_ids.push_back(pid);
        }
        Eigen::VectorXd vals(T);
        for (int k = 0; k < T; ++k) {
            vals(k) = parse_number(cells[static_cast<std::size_t>(k) + 2],
                                   "curve CSV row " + std::to_string(line_no));
            if (!std::isfinite(vals(k)))
                throw InputError("non-finite curve value at row " + std::to_string(line_no));
        }
        const auto key = std::make_pair(curve_index[cid], predictor_index[pid]);
        if (!rows.emplace(key, std::move(vals)).second)
            throw InputError("duplicate curve row for (" + cid + ", " + pid + ")");
    }
    const int n = static_cast<int>(curve_ids.size());
    const int p = static_cast<int>(predictor_ids.size());
    if (n == 0 || p == 0) throw InputError("curve CSV has no data rows: " + path);

    CurveTable table;
    table.curve_ids = std::move(curve_ids);
    table.predictor_ids = std::move(predictor_ids);
    table.grid = std::move(grid);
    table.curves.assign(static_cast<std::size_t>(p), Eigen::MatrixXd(n, T));
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) {
            const auto it = rows.find(std::make_pair(i, j));
            if (it == rows.end())
                throw InputError("curve CSV missing row for (" + table.curve_ids[static_cast<std::size_t>(i)] +
                                 ", " + table.predictor_ids[static_cast<std::size_t>(j)] + ")");
            table.curves[static_cast<std::size_t>(j)].row(i) = it->second.transpose();
        }
    return table;
}

Eigen::VectorXd read_response_csv(const std::string& path, const std::vector<std::string>& curve_ids) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open response CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty response CSV: " + path);
    {
        const auto header = split_line(line);
        if (header.size() != 2 || header[0] != "curve_id" || header[1] != "y")
            throw InputError("response CSV header must be 'curve_id,y': " + path);
    }
    std::map<std::string, double> values;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        if (cells.size() != 2)
            throw InputError("response CSV row " + std::to_string(line_no) + " must be 'curve_id,y'");
        const double v = parse_number(cells[1], "response CSV row " + std::to_string(line_no));
        if (!values.emplace(cells[0], v).second)
            throw InputError("duplicate response for curve_id '" + cells[0] + "'");
    }
    Eigen::VectorXd y(static_cast<int>(curve_ids.size()));
    for (std::size_t i = 0; i < curve_ids.size(); ++i) {
        const auto it = values.find(curve_ids[i]);
        if (it == values.end())
            throw InputError("response CSV missing curve_id '" + curve_ids[i] + "'");
        y(static_cast<int>(i)) = it->second;
    }
    return y;
}

void write_curves_csv(const std::string& path, const CurveTable& table) {
    std::string out = "t";
    for (int k = 0; k < table.grid.size(); ++k) out += "," + fmt(table.grid.points(k));
    out += '\n';
    for (std::size_t i = 0; i < table.curve_ids.size(); ++i)
        for (std::size_t j = 0; j < table.predictor_ids.size(); ++j) {
            out += table.curve_ids[i] + "," + table.predictor_ids[j];
            const auto& row = table.curves[j].row(static_cast<int>(i));
            for (int k = 0; k < table.grid.size(); ++k) out += "," + fmt(row(k));
            out += '\n';
        }
    atomic_write_text(path, out);
}

void write_response_csv(const std::string& path, const std::vector<std::string>& curve_ids,
                        const Eigen::VectorXd& y) {
    std::string out = "curve_id,y\n";
    for (std::size_t i = 0; i < curve_ids.size(); ++i)
        out += curve_ids[i] + "," + fmt(y(static_cast<int>(i))) + '\n';
    atomic_write_text(path, out);
}

void write_predictions_csv(const std::string& path, const std::vector<std::string>& curve_ids,
                           const Eigen::VectorXd& predictions) {
    std::string out = "curve_id,prediction\n";
    for (std::size_t i = 0; i < curve_ids.size(); ++i)
        out += curve_ids[i] + "," + fmt(predictions(static_cast<int>(i))) + '\n';
    atomic_write_text(path, out);
}

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw InputError("failed writing file: " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace far
