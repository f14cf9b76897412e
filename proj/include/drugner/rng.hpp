#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace drugner {

// Seeded RNG wrapper. Raw mt19937_64 output is specified by the standard, so
// mapping to ranges by hand keeps streams identical across compilers; the
// std::uniform_* distributions do not guarantee that.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return (gen_() >> 11) * (1.0 / 9007199254740992.0); }

    // Uniform in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace drugner
