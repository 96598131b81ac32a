#pragma once

#include <cstdint>

namespace chanchart {

/// SplitMix64 step; good avalanche for deriving stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic sub-seed for a named stream of a master seed, so
/// independent consumers (trajectory, scatterers, noise, shuffles) never
/// share state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 1));
}

/// Kahan compensated accumulator: reduction results stay stable to ~1e-16
/// regardless of summation chunking.
class KahanSum {
public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace chanchart
