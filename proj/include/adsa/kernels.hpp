// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

// Hot loops in two flavours. `serial` is the reference; `omp` splits the
// outer loop across threads. Every output element is produced by exactly one
// thread with the same arithmetic as the serial code, so both paths are
// bit-identical and the tests compare them with ==.
namespace adsa::kernels {

using ValueViews = std::span<const std::span<const double>>;

namespace serial {

/// Pairwise value-cosine matrix (row-major L x L, zero diagonal) and the
/// per-row average over the L-1 off-diagonal entries. avg is all zeros for
/// L < 2.
void similarity(ValueViews values, std::span<double> matrix, std::span<double> avg);

/// y = W x, W row-major rows x cols.
void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y);

}  // namespace serial

namespace omp {

void similarity(ValueViews values, std::span<double> matrix, std::span<double> avg);

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y);

}  // namespace omp

/// True when the library was built with OpenMP.
bool openmp_available();

/// Process-wide switch for the dispatching entry points below. Defaults to on
/// when OpenMP is available.
void set_parallel(bool enabled);
bool parallel_enabled();

void similarity(ValueViews values, std::span<double> matrix, std::span<double> avg);

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y);

}  // namespace adsa::kernels
