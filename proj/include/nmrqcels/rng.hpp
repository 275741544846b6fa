// Copyright 2026 The nmrqcels Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nmrqcels {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// (seed, index) pair so that parallel schedules never change results.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Portable random stream. std::mt19937_64 output is fixed by the standard;
/// the conversions below are written out so results do not depend on the
/// standard library's distribution implementations.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
    }

    /// Number of successes in `trials` Bernoulli(p) draws.
    std::uint64_t binomial(std::uint64_t trials, double p) {
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < trials; ++i) {
            hits += uniform() < p ? 1U : 0U;
        }
        return hits;
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace nmrqcels
