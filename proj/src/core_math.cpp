// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#include "adsa/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adsa {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double l2_norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

double cosine_from_norms(double dot_ab, double norm_a, double norm_b) {
    if (norm_a < kDegenerateNorm || norm_b < kDegenerateNorm) {
        return 0.0;
    }
    return dot_ab / (norm_a * norm_b);
}

Cosine cosine_similarity(std::span<const double> a, std::span<const double> b) {
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na < kDegenerateNorm || nb < kDegenerateNorm) {
        return {0.0, true};
    }
    return {cosine_from_norms(dot(a, b), na, nb), false};
}

std::vector<double> softmax(std::span<const double> scores) {
    if (scores.empty()) {
        throw std::invalid_argument("softmax: empty input");
    }
    const double mx = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - mx);
        sum += out[i];
    }
    for (double& w : out) {
        w /= sum;
    }
    return out;
}

Vec rope_rotate(std::span<const double> x, std::uint64_t pos, double theta_base) {
    const std::size_t d = x.size();
    if (d % 2 != 0) {
        throw std::invalid_argument("rope_rotate: dimension must be even");
    }
    if (!(theta_base > 0.0)) {
        throw std::invalid_argument("rope_rotate: theta_base must be positive");
    }
    Vec out(d);
    const double p = static_cast<double>(pos);
    for (std::size_t i = 0; i < d / 2; ++i) {
        const double inv_freq = std::pow(theta_base, -static_cast<double>(2 * i) / static_cast<double>(d));
        const double angle = p * inv_freq;
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double x0 = x[2 * i];
        const double x1 = x[2 * i + 1];
        out[2 * i] = x0 * c - x1 * s;
        out[2 * i + 1] = x0 * s + x1 * c;
    }
    return out;
}

Attended attend_single_weighted(std::span<const double> q,
                                std::span<const std::span<const double>> keys,
                                std::span<const std::span<const double>> vals) {
    if (keys.empty()) {
        throw std::invalid_argument("attend_single: empty context");
    }
    if (keys.size() != vals.size()) {
        throw std::invalid_argument("attend_single: keys/values length mismatch");
    }
    const std::size_t d = q.size();
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    std::vector<double> scores(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        scores[i] = dot(q, keys[i]) * scale;
    }
    Attended res;
    res.weights = softmax(scores);

    const std::size_t dv = vals.front().size();
    res.output.assign(dv, 0.0);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i].size() != dv) {
            throw std::invalid_argument("attend_single: ragged values");
        }
        const double w = res.weights[i];
        for (std::size_t c = 0; c < dv; ++c) {
            res.output[c] += w * vals[i][c];
        }
    }
    return res;
}

Vec attend_single(std::span<const double> q,
                  std::span<const std::span<const double>> keys,
                  std::span<const std::span<const double>> vals) {
    return attend_single_weighted(q, keys, vals).output;
}

Vec attend_single(std::span<const double> q, const std::vector<Vec>& keys, const std::vector<Vec>& vals) {
    std::vector<std::span<const double>> kv(keys.begin(), keys.end());
    std::vector<std::span<const double>> vv(vals.begin(), vals.end());
    return attend_single(q, kv, vv);
}

}  // namespace adsa
