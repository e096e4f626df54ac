#include "far/dataset.hpp"

#include "far/errors.hpp"

namespace far {

std::pair<Eigen::VectorXd, double> center_response(const Eigen::VectorXd& raw) {
    if (raw.size() == 0) throw InputError("empty response");
    if (!raw.allFinite()) throw InputError("response has non-finite values");
    const double mean = raw.mean();
    return {raw.array() - mean, mean};
}

FunctionalDataset make_dataset(TimeGrid grid, std::vector<Eigen::MatrixXd> curves,
                               const Eigen::VectorXd& raw_response) {
    const int T = grid.size();
    const int n = static_cast<int>(raw_response.size());
    for (std::size_t j = 0; j < curves.size(); ++j) {
        const auto& X = curves[j];
        if (X.rows() != n)
            throw InputError("predictor " + std::to_string(j) + ": curve count differs from response length");
        if (X.cols() != T)
            throw InputError("predictor " + std::to_string(j) + ": curves not sampled on the dataset grid");
        if (!X.allFinite())
            throw InputError("predictor " + std::to_string(j) + ": non-finite curve values");
    }
    auto [yc, mean] = center_response(raw_response);
    return FunctionalDataset{std::move(grid), std::move(curves), std::move(yc), mean};
}

}  // namespace far
