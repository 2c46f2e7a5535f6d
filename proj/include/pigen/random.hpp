// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file random.hpp
 * @brief Seed splitting. Every random stream in a run is derived from one
 *        master seed so whole pipelines are reproducible.
 *
 * derive_seed(master, stream) = splitmix64(master ^ splitmix64(stream)).
 * Streams are the Stream enum values; per-cycle streams nest a second
 * derive_seed call with the cycle index.
 */

#pragma once

#include <cstdint>
#include <random>

namespace pigen {

using Rng = std::mt19937_64;

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
    Sampler = 1,
    RbmInit = 2,
    TrainingDistribution = 3,
    Training = 4,
    Generation = 5,
    RandomBaseline = 6,
};

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return splitmix64(master ^ splitmix64(stream));
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream) noexcept {
    return derive_seed(master, static_cast<std::uint64_t>(stream));
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                                  std::uint64_t index) noexcept {
    return derive_seed(derive_seed(master, stream), index);
}

/// Uniform double in [0, 1) with 53 random bits; identical across standard libraries.
[[nodiscard]] inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace pigen
