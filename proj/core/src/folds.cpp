#include "far/folds.hpp"

#include <numeric>

#include "far/errors.hpp"
#include "far/rng.hpp"

namespace far {

std::vector<std::vector<int>> make_folds(int n, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("cross-validation needs k >= 2");
    if (k > n) throw ConfigError("cross-validation needs k <= n");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    shuffle(order, rng);
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) folds[static_cast<std::size_t>(i % k)].push_back(order[static_cast<std::size_t>(i)]);
    return folds;
}

}  // namespace far
