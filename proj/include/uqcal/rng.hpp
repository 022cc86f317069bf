#pragma once

#include <cstdint>
#include <random>

namespace uqcal {

// splitmix64; used both as a seed mixer and to derive per-phase seeds so any
// pipeline phase can be replayed in isolation from the master seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    return mix_seed(master ^ mix_seed(tag));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag_a, std::uint64_t tag_b) {
    return mix_seed(derive_seed(master, tag_a) ^ mix_seed(tag_b + 0x517CC1B727220A95ull));
}

/// mt19937_64 with an explicit uint64 -> double(0,1] ... [0,1) mapping.
/// std::uniform_real_distribution is implementation-defined, which would break
/// the byte-identical-replay contract across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t next_u64() { return eng_(); }

    // integer in [0, n) without modulo bias (rejection)
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

  private:
    std::mt19937_64 eng_;
};

} // namespace uqcal
