#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace relasso {

// splitmix64 step: advances `state` and returns a mixed 64-bit value.
// Used for seeding and for deriving independent substreams.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Mixes a base seed with a stream tag (rep index, cell index, purpose tag).
// Different tags give statistically independent streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL + (tag << 1));
    splitmix64_next(s);
    return splitmix64_next(s);
}

// Purpose tags for substream derivation. Keeping them centralized makes the
// stream layout auditable: changing one consumer cannot silently shift another.
namespace stream {
inline constexpr std::uint64_t kInit = 0x11;
inline constexpr std::uint64_t kShuffle = 0x22;
inline constexpr std::uint64_t kSplit = 0x33;
inline constexpr std::uint64_t kXTrain = 0x44;
inline constexpr std::uint64_t kXTest = 0x55;
inline constexpr std::uint64_t kNoiseTrain = 0x66;
inline constexpr std::uint64_t kNoiseTest = 0x77;
inline constexpr std::uint64_t kNet = 0x88;
inline constexpr std::uint64_t kCluster = 0x99;
}  // namespace stream

// xoshiro256++ seeded via splitmix64. All sampling in the project goes
// through this class so results are reproducible across platforms; nothing
// from <random> is used for value generation.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64_next(s);
    }

    // Independent substream for (seed, tag).
    static Rng stream(std::uint64_t seed, std::uint64_t tag) { return Rng(mix_seed(seed, tag)); }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; generates pairs and caches the second.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        // log needs (0, 1]; 1 - uniform01() avoids 0 exactly.
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

    // Uniform integer in [0, n) via 128-bit multiply-shift.
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    // +1 or -1 with equal probability.
    double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(items[i - 1], items[j]);
        }
    }

  private:
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace relasso
