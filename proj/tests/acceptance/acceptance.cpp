// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Tolerances are fixed here, not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adsa/harness.hpp"
#include "oracles.hpp"

namespace h = adsa::harness;
using adsa::CachePolicy;
using adsa::KvCache;
using adsa::KvEntry;
using adsa::ModelConfig;
using adsa::TokenId;
using adsa::Variant;

namespace {

constexpr double kLogitTol = 1e-9;
constexpr double kCosineBound = 1.0 + 1e-12;
constexpr double kRopeTol = 1e-9;
constexpr double kPercentTol = 0.001;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;
int known_failures = 0;
std::vector<std::string> known_fail;  // names passed with --known-fail

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
        o.pass = false;
        o.detail += " [over time budget " + std::to_string(budget_s) + " s]";
    }
    const bool known = std::find(known_fail.begin(), known_fail.end(), name) != known_fail.end();
    if (!o.pass && known) {
        o.detail += " [known failure]";
    }
    std::printf("%s %-28s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) {
        ++(known ? known_failures : failures);
    }
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

std::vector<KvEntry> as_entries(const std::vector<std::vector<double>>& vals) {
    std::vector<KvEntry> out;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        out.push_back(KvEntry{vals[i], vals[i], i, i});
    }
    return out;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

Outcome exact_context_equivalence() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    int configs = 0;
    for (std::size_t layers : {1u, 2u, 4u}) {
        for (std::size_t d : {16u, 32u, 64u}) {
            ModelConfig c;
            c.vocab_size = 40;
            c.d_model = d;
            c.n_heads = d / 16;
            c.n_layers = layers;
            c.seq_capacity = 64;
            c.seed = rng();
            const adsa::Model model(c);
            const std::size_t T = 64;
            const std::size_t n = 1 + rng() % 6, m = 1 + rng() % 10;
            // K = every previous token the sequence can ever have.
            const CachePolicy full{n, m, T - n - m, T, Variant::adsa};
            adsa::GenerateOptions o;
            o.keep_logits = true;
            o.temperature = (configs % 2) ? 1.0 : 0.0;
            const std::vector<TokenId> prompt{static_cast<TokenId>(rng() % 40)};
            const auto a = adsa::generate(model, prompt, T, full, configs, o);
            const auto b = adsa::generate(model, prompt, T, CachePolicy::make_dense(T), configs, o);
            if (a.tokens != b.tokens) {
                return {false, "token sequences differ (config " + std::to_string(configs) + ")"};
            }
            for (std::size_t k = 0; k < T; ++k) {
                worst = std::max(worst, max_abs_diff(a.logits[k], b.logits[k]));
            }
            ++configs;
        }
    }
    return {worst <= kLogitTol, std::to_string(configs) + " configs, max |dlogit| = " + sci(worst)};
}

Outcome topk_oracle() {
    std::mt19937_64 rng(202);
    std::size_t checks = 0;
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t L = inst % 13;
        // Duplicates and degenerate vectors produce exact ties in avg.
        const auto vals = adsa::oracle::random_values(rng, L, 1 + inst % 6, 0.3, 0.15);
        const auto region = as_entries(vals);
        const auto stats = adsa::similarity_stats(region);
        const auto ref = adsa::oracle::naive_similarity(vals);
        for (std::size_t k = 0; k <= L; ++k) {
            const auto got = adsa::topk_select(region, stats, k);
            const auto want = adsa::oracle::brute_force_topk(ref.avg, k);
            if (got != want) {
                return {false, "mismatch at instance " + std::to_string(inst) + ", K=" + std::to_string(k)};
            }
            ++checks;
        }
    }
    return {true, "200 instances, " + std::to_string(checks) + " (instance, K) pairs"};
}

Outcome eviction_correctness() {
    std::mt19937_64 rng(303);
    std::size_t evictions = 0;
    for (int seq = 0; seq < 500; ++seq) {
        const std::size_t n = rng() % 4, m = rng() % 5;
        const std::size_t k = (n + m == 0) ? 1 + rng() % 3 : rng() % 4;
        const std::size_t cap = n + m + k + rng() % 8;
        const CachePolicy p{n, m, k, cap, Variant::adsa};
        KvCache cache;
        const std::size_t inserts = cap + 1 + rng() % (2 * cap + 1);
        const auto vals = adsa::oracle::random_values(rng, inserts, 4, 0.2, 0.05);
        for (std::size_t pos = 0; pos < inserts; ++pos) {
            const bool full = cache.size() == cap;
            std::vector<std::uint64_t> eligible;
            std::vector<double> avg;
            if (full) {
                const auto sizes = adsa::region_sizes(cache.size(), p);
                std::vector<std::vector<double>> prev;
                for (std::size_t i = sizes.prefix; i < sizes.prefix + sizes.previous; ++i) {
                    prev.push_back(cache.entries()[i].value);
                    eligible.push_back(cache.entries()[i].position);
                }
                avg = adsa::oracle::naive_similarity(prev).avg;
            }
            const auto ev = adsa::insert_with_eviction(cache, KvEntry{vals[pos], vals[pos], pos, pos}, p);
            if (cache.size() > cap) {
                return {false, "occupancy exceeded capacity"};
            }
            if (full != ev.has_value()) {
                return {false, "eviction happened iff full was violated"};
            }
            if (!ev || eligible.empty()) {
                evictions += ev ? 1 : 0;
                continue;
            }
            ++evictions;
            const auto it = std::find(eligible.begin(), eligible.end(), *ev);
            if (it == eligible.end()) {
                return {false, "evicted a protected position"};
            }
            const double best = *std::max_element(avg.begin(), avg.end());
            const std::size_t idx = static_cast<std::size_t>(it - eligible.begin());
            const auto first_best = std::find(avg.begin(), avg.end(), best) - avg.begin();
            if (avg[idx] != best || static_cast<std::ptrdiff_t>(idx) != first_best) {
                return {false, "evicted position does not have the maximal avg (sequence " + std::to_string(seq) +
                                   ")"};
            }
        }
    }
    return {true, "500 sequences, " + std::to_string(evictions) + " evictions checked"};
}

Outcome cache_vs_recompute() {
    double worst = 0.0;
    std::size_t steps = 0;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        ModelConfig c;
        c.vocab_size = 32;
        c.d_model = 16 * (1 + seed % 2);
        c.n_heads = 2;
        c.n_layers = 1 + seed % 3;
        c.seq_capacity = 32;
        c.seed = seed;
        const adsa::Model model(c);
        std::mt19937_64 rng(seed);
        std::vector<TokenId> toks(24);
        for (auto& t : toks) {
            t = static_cast<TokenId>(rng() % 32);
        }
        const auto ref = adsa::oracle::full_forward(model, toks);
        adsa::DecodeSession s(model, CachePolicy::make_dense(32));
        for (std::size_t t = 0; t < toks.size(); ++t) {
            worst = std::max(worst, max_abs_diff(s.decode_step(toks[t]), ref[t]));
            ++steps;
        }
    }
    return {worst <= kLogitTol, std::to_string(steps) + " steps, max |dlogit| = " + sci(worst)};
}

Outcome memory_accounting() {
    struct Case {
        std::size_t T;
        CachePolicy sparse;
        double expected;  // expected reduction
        const char* label;
    };
    const std::vector<Case> cases{
        {576, CachePolicy{32, 160, 64, 256, Variant::adsa}, 1.0 - 256.0 / 576.0, "-55.6%"},
        {1024, CachePolicy{64, 320, 128, 512, Variant::adsa}, 0.5, "-50.0%"},
    };
    std::ostringstream detail;
    bool ok = true;
    for (const Case& c : cases) {
        h::ExperimentSpec s;
        s.model.vocab_size = 32;
        s.model.d_model = 16;
        s.model.n_heads = 2;
        s.model.n_layers = 1;
        s.model.seq_capacity = c.T;
        s.length = c.T;
        s.prompt = {0};
        s.policies = {{"dense", CachePolicy::make_dense(c.T)}, {"adsa", c.sparse}};
        const auto rep = h::run_compare(s, false);
        const auto& dense = rep.rows[0];
        const auto& sparse = rep.rows[1];
        const bool exact = sparse.peak_bytes * c.T == dense.peak_bytes * c.sparse.capacity &&
                           dense.peak_context == c.T && sparse.peak_context == c.sparse.capacity;
        const bool within = std::abs(sparse.memory_reduction - c.expected) <= kPercentTol &&
                            std::abs(sparse.context_reduction - c.expected) <= kPercentTol;
        const bool label = h::format_percent(-sparse.memory_reduction) == c.label &&
                           h::format_percent(-sparse.context_reduction) == c.label;
        ok = ok && exact && within && label;
        detail << c.T << "->" << c.sparse.capacity << ": context " << h::format_percent(-sparse.context_reduction)
               << ", cache " << h::format_percent(-sparse.memory_reduction) << " (bytes " << sparse.peak_bytes << "/"
               << dense.peak_bytes << "); ";
    }
    return {ok, detail.str()};
}

Outcome similarity_properties() {
    std::mt19937_64 rng(606);
    double worst = 0.0;
    for (int set = 0; set < 1000; ++set) {
        const std::size_t L = 1 + set % 40;
        const auto vals = adsa::oracle::random_values(rng, L, 1 + set % 12, 0.1, 0.1);
        const auto stats = adsa::similarity_stats(as_entries(vals));
        for (std::size_t i = 0; i < L; ++i) {
            if (stats.at(i, i) != 0.0) {
                return {false, "nonzero diagonal"};
            }
            for (std::size_t j = 0; j < L; ++j) {
                if (stats.at(i, j) != stats.at(j, i)) {
                    return {false, "asymmetric entry"};
                }
                worst = std::max(worst, std::abs(stats.at(i, j)));
                if (!(std::abs(stats.at(i, j)) <= kCosineBound)) {
                    return {false, "|S_ij| out of bounds"};
                }
            }
        }
    }
    return {true, "1000 sets, max |S_ij| - 1 = " + sci(worst - 1.0)};
}

Outcome rope_properties() {
    std::mt19937_64 rng(707);
    std::uniform_int_distribution<std::uint64_t> pos(0, 8192);
    double worst_norm = 0.0, worst_shift = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t d = 2 * (1 + i % 32);
        const auto v = adsa::oracle::random_values(rng, 2, d);
        const auto m = pos(rng), n = pos(rng), s = pos(rng);
        const auto qm = adsa::rope_rotate(v[0], m);
        worst_norm = std::max(worst_norm, std::abs(adsa::l2_norm(qm) - adsa::l2_norm(v[0])));
        const double a = adsa::dot(qm, adsa::rope_rotate(v[1], n));
        const double b = adsa::dot(adsa::rope_rotate(v[0], m + s), adsa::rope_rotate(v[1], n + s));
        worst_shift = std::max(worst_shift, std::abs(a - b));
    }
    return {worst_norm <= kRopeTol && worst_shift <= kRopeTol,
            "1000 draws, max norm err " + sci(worst_norm) + ", max shift err " + sci(worst_shift)};
}

Outcome determinism() {
    h::ExperimentSpec s;
    s.model.vocab_size = 48;
    s.model.d_model = 16;
    s.model.n_heads = 2;
    s.model.n_layers = 2;
    s.model.seq_capacity = 128;
    s.model.seed = 7;
    s.length = 128;
    s.prompt = {1};
    s.seeds = {0, 1, 2};
    s.temperature = 1.0;
    s.policies = {{"dense", CachePolicy::make_dense(128)},
                  {"window", CachePolicy{0, 32, 0, 32, Variant::window}},
                  {"window_prefix", CachePolicy{4, 28, 0, 32, Variant::window_prefix}},
                  {"adsa-64", CachePolicy{4, 28, 32, 64, Variant::adsa}}};
    const auto base = std::filesystem::temp_directory_path() / "adsa_acceptance_determinism";
    std::filesystem::remove_all(base);
    s.out_dir = base / "a";
    h::run_compare(s);
    s.out_dir = base / "b";
    h::run_compare(s);
    const std::string a = read_file(base / "a" / "steps.csv");
    const std::string b = read_file(base / "b" / "steps.csv");
    return {!a.empty() && a == b, std::to_string(a.size()) + " bytes of steps.csv, identical = " +
                                       (a == b ? std::string("yes") : std::string("no"))};
}

Outcome ablation_direction() {
    int local_wins = 0;
    std::ostringstream counts;
    std::map<std::string, int> tally;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        h::ExperimentSpec s;
        s.model.vocab_size = 64;
        s.model.d_model = 32;
        s.model.n_heads = 2;
        s.model.n_layers = 2;
        s.model.seq_capacity = 128;
        s.model.seed = 1000 + seed;
        s.length = 128;
        s.prompt = {static_cast<TokenId>(seed % 64)};
        s.seeds = {seed};
        s.temperature = 1.0;
        s.policies = {{"adsa", CachePolicy{4, 16, 16, 64, Variant::adsa}}};
        const auto rep = h::run_ablation(s, false);
        const std::string& w = rep.largest_removal.front();
        ++tally[w.substr(w.find('/') + 1)];
        local_wins += w == "adsa/local_off" ? 1 : 0;
    }
    for (const auto& [k, v] : tally) {
        counts << k << "=" << v << " ";
    }
    const double frac = local_wins / 20.0;
    return {frac >= 0.8, "local_off largest on " + std::to_string(local_wins) + "/20 (" + counts.str() + ")"};
}

}  // namespace

// --known-fail <name> keeps a criterion's FAIL line but leaves the exit code
// alone; used only for criteria documented as unattainable on the toy model.
int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--known-fail") {
            known_fail.emplace_back(argv[++i]);
        }
    }
    criterion("exact_context_equivalence", 10, exact_context_equivalence);
    criterion("topk_oracle_equivalence", 60, topk_oracle);
    criterion("eviction_correctness", 0, eviction_correctness);
    criterion("cache_vs_recompute", 10, cache_vs_recompute);
    criterion("memory_accounting", 30, memory_accounting);
    criterion("similarity_properties", 0, similarity_properties);
    criterion("rope_properties", 0, rope_properties);
    criterion("determinism", 0, determinism);
    criterion("ablation_direction", 0, ablation_direction);
    std::printf("%d criteria failed (%d known)\n", failures + known_failures, known_failures);
    return failures == 0 ? 0 : 1;
}
