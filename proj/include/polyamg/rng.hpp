#pragma once

#include <cstdint>
#include <random>

namespace polyamg {

/// Deterministic random stream. mt19937_64 output is pinned by the C++
/// standard and the mappings below avoid the implementation-defined
/// std::uniform_*_distribution, so identical seeds give identical streams
/// on every platform.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Uniform integer in [0, n) by rejection (unbiased).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

    /// Uniform integer in [lo, hi] inclusive.
    long long uniform_int(long long lo, long long hi) {
        return lo + static_cast<long long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace polyamg
