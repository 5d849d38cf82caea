// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

// Serial vs OpenMP kernels, plus one end-to-end adsa decode.

#include <benchmark/benchmark.h>

#include <random>
#include <span>
#include <vector>

#include "adsa/kernels.hpp"
#include "adsa/model.hpp"

namespace {

std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t d) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> out(n, std::vector<double>(d));
    for (auto& row : out) {
        for (double& x : row) {
            x = g(rng);
        }
    }
    return out;
}

template <bool Parallel>
void BM_Similarity(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto rows = random_rows(n, 64);
    const std::vector<std::span<const double>> views(rows.begin(), rows.end());
    std::vector<double> matrix(n * n), avg(n);
    for (auto _ : state) {
        if constexpr (Parallel) {
            adsa::kernels::omp::similarity(views, matrix, avg);
        } else {
            adsa::kernels::serial::similarity(views, matrix, avg);
        }
        benchmark::DoNotOptimize(avg.data());
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}

template <bool Parallel>
void BM_Matvec(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto w = random_rows(1, n * n).front();
    const auto x = random_rows(1, n).front();
    std::vector<double> y(n);
    for (auto _ : state) {
        if constexpr (Parallel) {
            adsa::kernels::omp::matvec(w, n, n, x, y);
        } else {
            adsa::kernels::serial::matvec(w, n, n, x, y);
        }
        benchmark::DoNotOptimize(y.data());
    }
}

void BM_DecodeAdsa(benchmark::State& state) {
    adsa::ModelConfig c;
    c.vocab_size = 64;
    c.d_model = 64;
    c.n_heads = 4;
    c.n_layers = 2;
    c.seq_capacity = 576;
    const adsa::Model model(c);
    adsa::kernels::set_parallel(state.range(0) != 0);
    const adsa::CachePolicy p{32, 160, 64, 256, adsa::Variant::adsa};
    const std::vector<adsa::TokenId> prompt{0};
    for (auto _ : state) {
        auto run = adsa::generate(model, prompt, 576, p, 0);
        benchmark::DoNotOptimize(run.tokens.data());
    }
    adsa::kernels::set_parallel(true);
}

}  // namespace

BENCHMARK(BM_Similarity<false>)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Similarity<true>)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Matvec<false>)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Matvec<true>)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DecodeAdsa)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
