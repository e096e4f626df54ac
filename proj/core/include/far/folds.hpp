#pragma once
#include <cstdint>
#include <vector>

namespace far {

/// Seeded random partition of {0..n-1} into k folds with sizes differing by
/// at most one (shuffled indices dealt round-robin). Throws ConfigError when
/// k < 2 or k > n.
std::vector<std::vector<int>> make_folds(int n, int k, std::uint64_t seed);

}  // namespace far
