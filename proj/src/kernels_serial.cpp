// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <stdexcept>
#include <vector>

#include "adsa/core_math.hpp"
#include "adsa/kernels.hpp"

namespace adsa::kernels {

namespace {

void check_similarity_shapes(ValueViews values, std::span<double> matrix, std::span<double> avg) {
    const std::size_t n = values.size();
    if (matrix.size() != n * n || avg.size() != n) {
        throw std::invalid_argument("similarity: output buffers have the wrong size");
    }
}

std::atomic<bool> g_parallel{openmp_available()};

}  // namespace

namespace serial {

void similarity(ValueViews values, std::span<double> matrix, std::span<double> avg) {
    check_similarity_shapes(values, matrix, avg);
    const std::size_t n = values.size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = l2_norm(values[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        matrix[i * n + i] = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = cosine_from_norms(dot(values[i], values[j]), norms[i], norms[j]);
            matrix[i * n + j] = s;
            matrix[j * n + i] = s;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                acc += matrix[i * n + j];
            }
        }
        avg[i] = n >= 2 ? acc / static_cast<double>(n - 1) : 0.0;
    }
}

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y) {
    if (w.size() != rows * cols || x.size() != cols || y.size() != rows) {
        throw std::invalid_argument("matvec: shape mismatch");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot(w.subspan(r * cols, cols), x);
    }
}

}  // namespace serial

bool openmp_available() {
#ifdef ADSA_WITH_OPENMP
    return true;
#else
    return false;
#endif
}

void set_parallel(bool enabled) {
    g_parallel.store(enabled && openmp_available());
}

bool parallel_enabled() {
    return g_parallel.load();
}

void similarity(ValueViews values, std::span<double> matrix, std::span<double> avg) {
    if (parallel_enabled()) {
        omp::similarity(values, matrix, avg);
    } else {
        serial::similarity(values, matrix, avg);
    }
}

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y) {
    if (parallel_enabled()) {
        omp::matvec(w, rows, cols, x, y);
    } else {
        serial::matvec(w, rows, cols, x, y);
    }
}

}  // namespace adsa::kernels
