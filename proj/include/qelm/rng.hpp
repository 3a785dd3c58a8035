// Copyright 2026 The qelm developers.

// Licensed under the Apache License, Version 2.0 (the License);
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an AS IS BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

namespace qelm {

namespace detail {

inline constexpr std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

/// SplitMix64 finalizer; full-period 64-bit mixer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

} // namespace detail

/// xoshiro256** generator. Small, fast, and fully specified here, so streams
/// are reproducible independently of the standard library in use.
class Xoshiro256 {
  public:
    using result_type = std::uint64_t;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    explicit Xoshiro256(std::uint64_t seed) {
        // SplitMix64 expansion of the seed into the 256-bit state.
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s += detail::kGolden;
            word = detail::mix64(s);
        }
    }

    result_type operator()() {
        const std::uint64_t result = detail::rotl64(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

  private:
    std::array<std::uint64_t, 4> state_{};
};

/// Stage tags for deriving independent substreams from one master seed.
/// Every (seed, stage, a, b) tuple names its own stream, so results do not
/// depend on execution order or on how work is spread across threads.
enum class Stage : std::uint64_t {
    Pool = 1,       // state pool generation (a = state index)
    Counts = 2,     // measurement records (a = repetition, b = state)
    Resample = 3,   // one retry for degenerate conditional records
    Split = 4,      // train/test splits (a = repetition, b = grid index)
    Candidate = 5,  // random configuration draws (a = candidate index)
    SearchPool = 6, // validation pool for configuration search
    SearchCounts = 7,
    SearchResample = 8,
    SearchSplit = 9,
    Single = 10, // one-off draws (CLI simulate, tests)
};

inline std::uint64_t stream_key(std::uint64_t master, Stage stage,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = detail::mix64(master + detail::kGolden);
    h = detail::mix64(h + detail::kGolden + static_cast<std::uint64_t>(stage));
    h = detail::mix64(h + detail::kGolden + a);
    h = detail::mix64(h + detail::kGolden + b);
    return h;
}

inline Xoshiro256 substream(std::uint64_t master, Stage stage,
                            std::uint64_t a = 0, std::uint64_t b = 0) {
    return Xoshiro256(stream_key(master, stage, a, b));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_double(Xoshiro256& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(Xoshiro256& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_double(rng);
}

/// Unbiased integer in [0, bound) by rejection.
inline std::uint64_t uniform_below(Xoshiro256& rng, std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("uniform_below: bound must be positive");
    }
    const std::uint64_t threshold = (0 - bound) % bound; // 2^64 mod bound
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

/// Two independent standard normals (Box-Muller).
inline std::pair<double, double> normal_pair(Xoshiro256& rng) {
    const double u1 = 1.0 - uniform_double(rng); // (0, 1], keeps log finite
    const double u2 = uniform_double(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

} // namespace qelm
