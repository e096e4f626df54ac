#pragma once
#include <cstdint>
#include <random>
#include <vector>

namespace far {

/// Seedable random generator with a fully pinned output sequence.
///
/// mt19937_64 is specified bit-for-bit by the standard, but the
/// distribution adaptors are not, so uniform/normal/integer draws are
/// generated explicitly here. Two builds given the same seed produce
/// identical streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double normal();

    /// Uniform integer on [0, n), n >= 1, via rejection sampling.
    int uniform_int(int n);

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Derive an independent stream seed from (base, stream) via splitmix64.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Deterministic Fisher-Yates shuffle (std::shuffle is unspecified).
void shuffle(std::vector<int>& v, Rng& rng);

}  // namespace far
