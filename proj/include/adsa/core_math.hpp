// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace adsa {

using Vec = std::vector<double>;

/// Norms below this are treated as zero vectors.
inline constexpr double kDegenerateNorm = 1e-12;

inline constexpr double kDefaultRopeBase = 10000.0;

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

struct Cosine {
    double value = 0.0;
    bool degenerate = false;  ///< one of the inputs had norm < kDegenerateNorm
};

/// (a.b) / (|a||b|). A near-zero input yields {0, degenerate=true}, so such
/// vectors look maximally dissimilar to everything.
Cosine cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Same arithmetic as cosine_similarity with the norms supplied by the caller.
/// Kernels use this so that pre-computed norms give bit-identical results.
double cosine_from_norms(double dot_ab, double norm_a, double norm_b);

/// Max-subtracted softmax. Throws std::invalid_argument on empty input.
std::vector<double> softmax(std::span<const double> scores);

/// Rotary position encoding: pair (x[2i], x[2i+1]) is rotated by
/// pos * base^(-2i/d). Throws std::invalid_argument for odd d or base <= 0.
Vec rope_rotate(std::span<const double> x, std::uint64_t pos, double theta_base = kDefaultRopeBase);

struct Attended {
    Vec output;
    std::vector<double> weights;
};

/// Scaled dot-product attention for one query over an explicit context.
/// keys[i] and vals[i] are views of length d; throws on empty or mismatched
/// context.
Attended attend_single_weighted(std::span<const double> q,
                                std::span<const std::span<const double>> keys,
                                std::span<const std::span<const double>> vals);

Vec attend_single(std::span<const double> q,
                  std::span<const std::span<const double>> keys,
                  std::span<const std::span<const double>> vals);

/// Convenience overload for owning containers.
Vec attend_single(std::span<const double> q, const std::vector<Vec>& keys, const std::vector<Vec>& vals);

}  // namespace adsa
