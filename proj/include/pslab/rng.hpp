// Counter-based deterministic random source.
//
// Draw i is splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15). The generator
// is stateless apart from the counter, so a (seed, counter) pair pins every
// draw independently of call history. Fixed here for reproducibility; do not
// swap in std::mt19937 or platform generators.
#pragma once

#include <cstdint>

namespace pslab {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() {
        return splitmix64(seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace pslab
