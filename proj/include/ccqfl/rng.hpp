// Copyright 2026 The ccqfl developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Seeded random streams with deterministic substream derivation, so that
 * parallel and serial executions of the same experiment are bit-identical.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ccqfl {

/// One mixing round of splitmix64. Used to derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/**
 * @brief A seeded mt19937_64 stream with portable draw primitives.
 *
 * The engine itself is fully specified by the standard; the distributions
 * here are hand-rolled (rather than <random> distribution objects, whose
 * output is implementation-defined) so that identical seeds produce
 * identical draws on every platform.
 *
 * `child(k)` derives an independent substream from the parent's seed and the
 * index `k` without consuming parent state. Workers that own `child(e)` for
 * distinct `e` therefore produce the same draws whether they run serially or
 * in parallel.
 */
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Unbiased uniform integer in [0, bound). bound must be nonzero.
    std::uint64_t uniform_int(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Standard normal via Box-Muller (portable, unlike std::normal_distribution).
    double normal() {
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    /// Independent substream for index k, derived from this stream's seed only.
    RngStream child(std::uint64_t k) const {
        return RngStream(splitmix64(seed_ ^ splitmix64(k + 0x632BE59BD9B4E019ULL)));
    }

    std::uint64_t seed() const { return seed_; }

    std::mt19937_64 &engine() { return engine_; }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace ccqfl
