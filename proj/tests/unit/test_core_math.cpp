// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "adsa/core_math.hpp"
#include "doctest.h"
#include "oracles.hpp"

using adsa::Vec;

TEST_CASE("cosine_similarity examples") {
    const Vec a{0.3, -1.2, 4.0};
    CHECK(adsa::cosine_similarity(a, a).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(adsa::cosine_similarity(Vec{1, 0}, Vec{0, 1}).value == 0.0);
    // 4 / (sqrt5 * sqrt5)
    CHECK(adsa::cosine_similarity(Vec{1, 2}, Vec{2, 1}).value == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("cosine_similarity flags degenerate inputs") {
    const auto c = adsa::cosine_similarity(Vec{1e-14, 0.0}, Vec{1.0, 1.0});
    CHECK(c.degenerate);
    CHECK(c.value == 0.0);
    CHECK_FALSE(adsa::cosine_similarity(Vec{1, 1}, Vec{1, 2}).degenerate);
}

TEST_CASE("cosine_similarity is symmetric and bounded") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const auto v = adsa::oracle::random_values(rng, 2, 1 + i % 9, 0.1, 0.1);
        const double ab = adsa::cosine_similarity(v[0], v[1]).value;
        const double ba = adsa::cosine_similarity(v[1], v[0]).value;
        CHECK(ab == ba);
        CHECK(std::abs(ab) <= 1.0 + 1e-12);
    }
}

TEST_CASE("softmax examples") {
    const auto p = adsa::softmax(Vec{0.0, 0.0});
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
    CHECK(adsa::softmax(Vec{-3.7})[0] == 1.0);
    const auto q = adsa::softmax(Vec{0.0, std::log(3.0)});
    CHECK(q[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(q[1] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK_THROWS_AS(adsa::softmax(Vec{}), std::invalid_argument);
}

TEST_CASE("softmax normalises and ignores a constant shift") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        Vec s(1 + i % 17);
        for (double& x : s) {
            x = g(rng);
        }
        Vec shifted = s;
        for (double& x : shifted) {
            x += 123.25;
        }
        const auto p = adsa::softmax(s);
        const auto ps = adsa::softmax(shifted);
        double sum = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            sum += p[k];
            CHECK(p[k] >= 0.0);
            CHECK(p[k] <= 1.0);
            CHECK(std::abs(p[k] - ps[k]) <= 1e-9);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("rope_rotate") {
    const Vec x{0.5, -1.0, 2.0, 0.25, 3.0, -0.75};
    CHECK(adsa::rope_rotate(x, 0) == x);
    CHECK_THROWS_AS(adsa::rope_rotate(Vec{1, 2, 3}, 1), std::invalid_argument);
    CHECK_THROWS_AS(adsa::rope_rotate(x, 1, 0.0), std::invalid_argument);

    SUBCASE("first pair rotates by pos radians") {
        const auto r = adsa::rope_rotate(Vec{1.0, 0.0}, 2);
        CHECK(r[0] == doctest::Approx(std::cos(2.0)).epsilon(1e-15));
        CHECK(r[1] == doctest::Approx(std::sin(2.0)).epsilon(1e-15));
    }

    SUBCASE("norm preserved and inner products depend on offset only") {
        std::mt19937_64 rng(5);
        std::uniform_int_distribution<std::uint64_t> pos(0, 4096);
        for (int i = 0; i < 200; ++i) {
            const auto v = adsa::oracle::random_values(rng, 2, 8);
            const auto m = pos(rng), n = pos(rng), s = pos(rng);
            CHECK(std::abs(adsa::l2_norm(adsa::rope_rotate(v[0], m)) - adsa::l2_norm(v[0])) <= 1e-9);
            const double a = adsa::dot(adsa::rope_rotate(v[0], m), adsa::rope_rotate(v[1], n));
            const double b = adsa::dot(adsa::rope_rotate(v[0], m + s), adsa::rope_rotate(v[1], n + s));
            CHECK(std::abs(a - b) <= 1e-9);
        }
    }
}

TEST_CASE("attend_single") {
    SUBCASE("singleton context returns the value") {
        const std::vector<Vec> k{{0.3, 0.1}}, v{{7.0, -2.5}};
        CHECK(adsa::attend_single(Vec{1.0, 2.0}, k, v) == v[0]);
    }
    SUBCASE("identical keys average the values") {
        const std::vector<Vec> k{{0.3, 0.1}, {0.3, 0.1}}, v{{1.0, 4.0}, {3.0, -2.0}};
        const auto out = adsa::attend_single(Vec{1.0, 2.0}, k, v);
        CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("three-token instance matches a 50-digit oracle") {
        // Frozen from tests/oracles/attention_oracle.py.
        const Vec q{1.0, 0.0, 0.5, -1.0};
        const std::vector<Vec> k{{0.2, -0.4, 1.0, 0.3}, {-1.0, 0.5, 0.25, 2.0}, {0.7, 0.1, -0.3, -0.9}};
        const std::vector<Vec> v{{1, 2, 3, 4}, {-0.5, 0, 0.5, 1}, {2, -1, 0, 0.25}};
        const Vec expected{1.484851674702176483, 0.10729610333209763592, 1.0735923439042997194,
                           1.6004163697373241284};
        const Vec expected_w{0.34662952815883393428, 0.06740751885559583307, 0.58596295298557023265};
        std::vector<std::span<const double>> kv(k.begin(), k.end()), vv(v.begin(), v.end());
        const auto res = adsa::attend_single_weighted(q, kv, vv);
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(std::abs(res.output[c] - expected[c]) <= 1e-14);
        }
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(std::abs(res.weights[i] - expected_w[i]) <= 1e-15);
        }
    }
    SUBCASE("output stays inside the value hull") {
        std::mt19937_64 rng(9);
        for (int i = 0; i < 100; ++i) {
            auto keys = adsa::oracle::random_values(rng, 6, 4);
            auto vals = adsa::oracle::random_values(rng, 6, 4);
            for (auto& val : vals) {
                val[2] = -1.5;  // shared coordinate
            }
            const auto q = adsa::oracle::random_values(rng, 1, 4).front();
            const auto out = adsa::attend_single(q, keys, vals);
            CHECK(out[2] == doctest::Approx(-1.5).epsilon(1e-14));
            for (std::size_t c : {0u, 1u, 3u}) {
                double lo = vals[0][c], hi = vals[0][c];
                for (const auto& val : vals) {
                    lo = std::min(lo, val[c]);
                    hi = std::max(hi, val[c]);
                }
                CHECK(out[c] >= lo - 1e-12);
                CHECK(out[c] <= hi + 1e-12);
            }
        }
    }
    SUBCASE("contract violations") {
        const std::vector<Vec> none;
        CHECK_THROWS_AS(adsa::attend_single(Vec{1, 0}, none, none), std::invalid_argument);
        const std::vector<Vec> k{{1, 0}}, v{{1, 0}, {0, 1}};
        CHECK_THROWS_AS(adsa::attend_single(Vec{1, 0}, k, v), std::invalid_argument);
    }
}
