// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#include "adsa/attention.hpp"

#include <stdexcept>
#include <string>

namespace adsa {

AttentionStep attend_indices(std::span<const double> q, std::uint64_t q_position, const KvCache& cache,
                             std::span<const std::size_t> indices, bool capture) {
    if (indices.empty()) {
        throw std::invalid_argument("attend: empty effective context");
    }
    const auto entries = cache.entries();
    std::vector<std::span<const double>> keys;
    std::vector<std::span<const double>> vals;
    keys.reserve(indices.size());
    vals.reserve(indices.size());

    AttentionStep step;
    step.used_positions.reserve(indices.size());
    for (std::size_t idx : indices) {
        const KvEntry& e = entries[idx];
        if (e.position > q_position) {
            throw std::logic_error("attend: causality violated, key position " + std::to_string(e.position) +
                                   " > query position " + std::to_string(q_position));
        }
        if (!step.used_positions.empty() && e.position <= step.used_positions.back()) {
            throw std::logic_error("attend: context positions must be strictly increasing");
        }
        keys.emplace_back(e.key);
        vals.emplace_back(e.value);
        step.used_positions.push_back(e.position);
    }

    Attended a = attend_single_weighted(q, keys, vals);
    step.output = std::move(a.output);
    step.context_len = indices.size();
    if (capture) {
        step.weights = std::move(a.weights);
    }
    return step;
}

AttentionStep attend(std::span<const double> q, std::uint64_t q_position, const KvCache& cache,
                     const CachePolicy& policy, bool capture, std::span<const double> previous_scores) {
    const std::vector<std::size_t> ctx = effective_context(cache, policy, previous_scores);
    return attend_indices(q, q_position, cache, ctx, capture);
}

}  // namespace adsa
