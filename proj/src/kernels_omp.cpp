// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "adsa/core_math.hpp"
#include "adsa/kernels.hpp"

namespace adsa::kernels::omp {

namespace {

// Below these sizes the fork/join costs more than the loop.
constexpr std::int64_t kMinRowsSimilarity = 48;
constexpr std::size_t kMinWorkMatvec = 1 << 14;

}  // namespace

void similarity(ValueViews values, std::span<double> matrix, std::span<double> avg) {
    const std::int64_t n = static_cast<std::int64_t>(values.size());
    if (matrix.size() != values.size() * values.size() || avg.size() != values.size()) {
        throw std::invalid_argument("similarity: output buffers have the wrong size");
    }
    std::vector<double> norms(values.size());

#pragma omp parallel if (n >= kMinRowsSimilarity)
    {
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            norms[i] = l2_norm(values[i]);
        }

        // Upper triangle rows shrink with i, so hand them out dynamically.
#pragma omp for schedule(dynamic, 8)
        for (std::int64_t i = 0; i < n; ++i) {
            matrix[i * n + i] = 0.0;
            for (std::int64_t j = i + 1; j < n; ++j) {
                const double s = cosine_from_norms(dot(values[i], values[j]), norms[i], norms[j]);
                matrix[i * n + j] = s;
                matrix[j * n + i] = s;
            }
        }

#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::int64_t j = 0; j < n; ++j) {
                if (j != i) {
                    acc += matrix[i * n + j];
                }
            }
            avg[i] = n >= 2 ? acc / static_cast<double>(n - 1) : 0.0;
        }
    }
}

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y) {
    if (w.size() != rows * cols || x.size() != cols || y.size() != rows) {
        throw std::invalid_argument("matvec: shape mismatch");
    }
    const std::int64_t r_end = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kMinWorkMatvec)
    for (std::int64_t r = 0; r < r_end; ++r) {
        y[r] = dot(w.subspan(r * cols, cols), x);
    }
}

}  // namespace adsa::kernels::omp
