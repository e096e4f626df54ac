#pragma once
#include <functional>

namespace far {

/// Run body(0..count-1) on up to `threads` workers. Results must be written
/// to pre-sized, index-disjoint slots; completion order is not observable.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace far
