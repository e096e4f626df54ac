#pragma once
#include <string>
#include <vector>

#include "far/dataset.hpp"

namespace far {

/// Contents of a wide-format curve CSV: header "t,<grid points>", then one
/// row per (curve_id, predictor_id) pair.
struct CurveTable {
    std::vector<std::string> curve_ids;      // order of first appearance
    std::vector<std::string> predictor_ids;  // order of first appearance
    TimeGrid grid;
    std::vector<Eigen::MatrixXd> curves;  // p entries, each n x T
};

CurveTable read_curves_csv(const std::string& path);

/// Response values aligned to curve_ids; throws InputError naming the first
/// curve_id the file is missing. Header must be "curve_id,y".
Eigen::VectorXd read_response_csv(const std::string& path, const std::vector<std::string>& curve_ids);

void write_curves_csv(const std::string& path, const CurveTable& table);
void write_response_csv(const std::string& path, const std::vector<std::string>& curve_ids,
                        const Eigen::VectorXd& y);
void write_predictions_csv(const std::string& path, const std::vector<std::string>& curve_ids,
                           const Eigen::VectorXd& predictions);

/// Write via a temporary file in the same directory, then rename.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace far
