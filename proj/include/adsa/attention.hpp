// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adsa/core_math.hpp"
#include "adsa/kv_cache.hpp"

namespace adsa {

/// Result of one query against one head's cache.
struct AttentionStep {
    Vec output;
    std::size_t context_len = 0;
    std::vector<double> weights;  ///< empty unless captured
    std::vector<std::uint64_t> used_positions;
};

/// Attention for a query already rotated at `q_position`. The context is
/// effective_context(cache, policy); `previous_scores` is forwarded to it.
/// The query token's own entry is expected to be cached already, so keys may
/// sit at q_position but never after it.
/// Throws std::logic_error if the context holds a position > q_position and
/// std::invalid_argument if the context is empty.
AttentionStep attend(std::span<const double> q, std::uint64_t q_position, const KvCache& cache,
                     const CachePolicy& policy, bool capture, std::span<const double> previous_scores = {});

/// Same, over an explicit list of cache indices.
AttentionStep attend_indices(std::span<const double> q, std::uint64_t q_position, const KvCache& cache,
                             std::span<const std::size_t> indices, bool capture);

/// Captured weights of one (layer, head) at one query position.
struct WeightRecord {
    std::size_t layer = 0;
    std::size_t head = 0;
    std::uint64_t q_position = 0;
    std::vector<std::uint64_t> used_positions;
    std::vector<double> weights;
};

}  // namespace adsa
