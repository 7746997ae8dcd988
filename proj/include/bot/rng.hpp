#pragma once

#include <cstdint>
#include <random>

#include "bot/angles.hpp"

namespace bot {

// Deterministic random source with a fixed per-call draw count, so streams
// stay aligned across runs and across policies sharing a seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on (0, 1), never returns an endpoint. Consumes one u64.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller. Consumes exactly two u64 per call.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    // Uniform integer in [0, n). Fixed-point multiply keeps the draw count at
    // one u64; exact for n dividing 2^64, bias < n/2^64 otherwise.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Decorrelated seed for substream k of a base seed.
    static std::uint64_t substream_seed(std::uint64_t base, std::uint64_t k) {
        return mix(base + 0x9E3779B97F4A7C15ULL * (k + 1));
    }

  private:
    std::mt19937_64 gen_;
};

// Substream ids used to split one episode seed into independent streams.
enum class Stream : std::uint64_t {
    scenario = 0,
    process_noise = 1,
    measurement_noise = 2,
    leg1_coin = 3,
    policy = 4,
};

inline Rng substream(std::uint64_t episode_seed, Stream s) {
    return Rng(Rng::substream_seed(episode_seed, static_cast<std::uint64_t>(s)));
}

}  // namespace bot
