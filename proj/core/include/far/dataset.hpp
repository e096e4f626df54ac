#pragma once
#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "far/grid.hpp"

namespace far {

/// n curves per predictor on a shared grid, plus the centered response.
struct FunctionalDataset {
    TimeGrid grid;
    std::vector<Eigen::MatrixXd> curves;  // p entries, each n x T
    Eigen::VectorXd y;                    // centered response
    double response_mean = 0.0;

    int n() const { return curves.empty() ? static_cast<int>(y.size()) : static_cast<int>(curves.front().rows()); }
    int p() const { return static_cast<int>(curves.size()); }
};

/// (centered response, mean). Throws InputError on an empty response.
std::pair<Eigen::VectorXd, double> center_response(const Eigen::VectorXd& raw);

/// Validate shapes/finiteness and center the raw response.
FunctionalDataset make_dataset(TimeGrid grid, std::vector<Eigen::MatrixXd> curves,
                               const Eigen::VectorXd& raw_response);

}  // namespace far
