// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace adsa {

/// 64-bit linear congruential generator (Knuth MMIX constants).
///
///   state <- state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
///
/// The state starts at the seed. `uniform()` advances once and returns
/// (state >> 11) * 2^-53, a double in [0, 1). The layout is fixed so that
/// other implementations can reproduce weights and samples bit-for-bit.
class Lcg64 {
public:
    static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
    static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

    explicit Lcg64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ = state_ * kMultiplier + kIncrement;
        return state_;
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

/// Box-Muller over an Lcg64 stream. Each pair consumes two uniforms u1, u2:
///   r = sqrt(-2 ln(1 - u1)),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)
/// and is emitted z0 first, then z1.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : lcg_(seed) {}

    double next();

private:
    Lcg64 lcg_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace adsa
