// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#include "adsa/kv_cache.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "adsa/kernels.hpp"

namespace adsa {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::dense:
            return "dense";
        case Variant::window:
            return "window";
        case Variant::window_prefix:
            return "window_prefix";
        case Variant::adsa:
            return "adsa";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    for (Variant v : {Variant::dense, Variant::window, Variant::window_prefix, Variant::adsa}) {
        if (name == to_string(v)) {
            return v;
        }
    }
    throw std::invalid_argument("unknown attention variant '" + std::string(name) + "'");
}

void CachePolicy::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid cache policy: " + what); };
    if (capacity == 0) {
        fail("capacity must be positive");
    }
    if (n_prefix + m_local > capacity) {
        fail("n_prefix + m_local exceeds capacity");
    }
    switch (variant) {
        case Variant::dense:
            break;
        case Variant::window:
            if (m_local == 0) {
                fail("window attention needs m_local >= 1");
            }
            break;
        case Variant::window_prefix:
            if (n_prefix + m_local == 0) {
                fail("window_prefix attention needs n_prefix + m_local >= 1");
            }
            break;
        case Variant::adsa:
            if (n_prefix + k_select + m_local > capacity) {
                fail("n_prefix + k_select + m_local exceeds capacity");
            }
            if (n_prefix + k_select + m_local == 0) {
                fail("adsa needs at least one of n_prefix, k_select, m_local");
            }
            break;
    }
}

CachePolicy CachePolicy::make_dense(std::size_t capacity) {
    CachePolicy p;
    p.variant = Variant::dense;
    p.capacity = capacity;
    p.n_prefix = 0;
    p.m_local = 1;
    p.k_select = 0;
    return p;
}

void to_json(nlohmann::json& j, const CachePolicy& p) {
    j = nlohmann::json{{"variant", std::string(to_string(p.variant))},
                       {"n_prefix", p.n_prefix},
                       {"m_local", p.m_local},
                       {"k_select", p.k_select},
                       {"capacity", p.capacity}};
}

void from_json(const nlohmann::json& j, CachePolicy& p) {
    p.variant = parse_variant(j.at("variant").get<std::string>());
    p.n_prefix = j.value("n_prefix", std::size_t{0});
    p.m_local = j.value("m_local", std::size_t{1});
    p.k_select = j.value("k_select", std::size_t{0});
    p.capacity = j.at("capacity").get<std::size_t>();
}

std::optional<std::uint64_t> KvCache::last_position() const {
    if (entries_.empty()) {
        return std::nullopt;
    }
    return entries_.back().position;
}

void KvCache::append(KvEntry entry) {
    if (!entries_.empty() && entry.position <= entries_.back().position) {
        throw std::invalid_argument("KvCache::append: position " + std::to_string(entry.position) +
                                    " is not past the last cached position " +
                                    std::to_string(entries_.back().position));
    }
    entries_.push_back(std::move(entry));
}

KvEntry KvCache::erase_at(std::size_t index) {
    if (index >= entries_.size()) {
        throw std::out_of_range("KvCache::erase_at: index out of range");
    }
    KvEntry out = std::move(entries_[index]);
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(index));
    return out;
}

RegionSizes region_sizes(std::size_t occupancy, const CachePolicy& policy) {
    RegionSizes r;
    r.prefix = std::min(policy.n_prefix, occupancy);
    r.local = std::min(policy.m_local, occupancy - r.prefix);
    r.previous = occupancy - r.prefix - r.local;
    return r;
}

RegionView partition(const KvCache& cache, const CachePolicy& policy) {
    const auto all = cache.entries();
    const RegionSizes r = region_sizes(all.size(), policy);
    return RegionView{all.subspan(0, r.prefix), all.subspan(r.prefix, r.previous),
                      all.subspan(r.prefix + r.previous, r.local)};
}

SimilarityStats::SimilarityStats(std::size_t n, std::vector<double> matrix, std::vector<double> avg)
    : n_(n), matrix_(std::move(matrix)), avg_(std::move(avg)) {
    if (matrix_.size() != n * n || avg_.size() != n) {
        throw std::invalid_argument("SimilarityStats: inconsistent sizes");
    }
}

SimilarityStats similarity_stats(std::span<const KvEntry> region) {
    const std::size_t n = region.size();
    std::vector<std::span<const double>> values;
    values.reserve(n);
    for (const KvEntry& e : region) {
        values.emplace_back(e.value);
    }
    std::vector<double> matrix(n * n, 0.0);
    std::vector<double> avg(n, 0.0);
    kernels::similarity(values, matrix, avg);
    return SimilarityStats(n, std::move(matrix), std::move(avg));
}

std::vector<std::size_t> lowest_k(std::span<const double> scores, std::size_t k) {
    if (k > scores.size()) {
        throw std::invalid_argument("lowest_k: k exceeds the number of candidates");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto by_score = [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), by_score);
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<std::size_t> topk_select(std::span<const KvEntry> previous, const SimilarityStats& stats, std::size_t k) {
    if (stats.size() != previous.size()) {
        throw std::invalid_argument("topk_select: stats do not match the region");
    }
    return lowest_k(stats.avg(), k);
}

namespace {

void check_scores(std::span<const double> scores, std::size_t previous_len) {
    if (!scores.empty() && scores.size() != previous_len) {
        throw std::invalid_argument("previous_scores must have one entry per previous-region token");
    }
}

std::size_t argmax_first(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    return best;
}

}  // namespace

std::vector<std::size_t> effective_context(const KvCache& cache, const CachePolicy& policy,
                                           std::span<const double> previous_scores) {
    const std::size_t occ = cache.size();
    std::vector<std::size_t> out;
    if (policy.variant == Variant::dense) {
        out.resize(occ);
        std::iota(out.begin(), out.end(), std::size_t{0});
        return out;
    }
    if (policy.variant == Variant::window) {
        const std::size_t keep = std::min(policy.m_local, occ);
        for (std::size_t i = occ - keep; i < occ; ++i) {
            out.push_back(i);
        }
        return out;
    }

    const RegionSizes r = region_sizes(occ, policy);
    out.reserve(occ);
    for (std::size_t i = 0; i < r.prefix; ++i) {
        out.push_back(i);
    }
    if (policy.variant == Variant::adsa && r.previous > 0) {
        check_scores(previous_scores, r.previous);
        if (policy.k_select >= r.previous) {
            for (std::size_t i = 0; i < r.previous; ++i) {
                out.push_back(r.prefix + i);
            }
        } else if (policy.k_select > 0) {
            std::vector<std::size_t> picked;
            if (previous_scores.empty()) {
                const RegionView view = partition(cache, policy);
                picked = topk_select(view.previous, similarity_stats(view.previous), policy.k_select);
            } else {
                picked = lowest_k(previous_scores, policy.k_select);
            }
            for (std::size_t i : picked) {
                out.push_back(r.prefix + i);
            }
        }
    }
    for (std::size_t i = r.prefix + r.previous; i < occ; ++i) {
        out.push_back(i);
    }
    return out;
}

std::optional<std::size_t> eviction_candidate(const KvCache& cache, const CachePolicy& policy,
                                              std::span<const double> previous_scores) {
    if (cache.size() < policy.capacity) {
        return std::nullopt;
    }
    const RegionSizes r = region_sizes(cache.size(), policy);
    if (r.previous > 0) {
        check_scores(previous_scores, r.previous);
        if (!previous_scores.empty()) {
            return r.prefix + argmax_first(previous_scores);
        }
        const RegionView view = partition(cache, policy);
        const SimilarityStats stats = similarity_stats(view.previous);
        return r.prefix + argmax_first(stats.avg());
    }
    if (r.local > 0) {
        return r.prefix;
    }
    return r.prefix - 1;
}

std::optional<std::uint64_t> insert_with_eviction(KvCache& cache, KvEntry entry, const CachePolicy& policy,
                                                  std::span<const double> previous_scores) {
    if (const auto last = cache.last_position(); last && entry.position <= *last) {
        throw std::invalid_argument("insert_with_eviction: out-of-order position " + std::to_string(entry.position));
    }
    std::optional<std::uint64_t> evicted;
    // A cache already over capacity (e.g. restored from a snapshot under a
    // smaller policy) is trimmed until the new entry fits.
    while (const auto victim = eviction_candidate(cache, policy, evicted ? std::span<const double>{} : previous_scores)) {
        evicted = cache.erase_at(*victim).position;
    }
    cache.append(std::move(entry));
    return evicted;
}

std::size_t Archive::append(std::uint64_t position, std::int64_t token) {
    if (!records_.empty() && position <= records_.back().position) {
        throw std::invalid_argument("Archive::append: position " + std::to_string(position) +
                                    " is not past the last archived position");
    }
    records_.push_back({position, token});
    return records_.size();
}

std::uint64_t memory_footprint(std::size_t occupancy, const FootprintModel& fm) {
    return static_cast<std::uint64_t>(occupancy) * fm.bytes_per_token();
}

nlohmann::json snapshot_to_json(const KvCache& cache, const CachePolicy& policy) {
    nlohmann::json entries = nlohmann::json::array();
    std::size_t head_dim = 0;
    for (const KvEntry& e : cache.entries()) {
        head_dim = e.key.size();
        entries.push_back({{"position", e.position}, {"step", e.step}, {"key", e.key}, {"value", e.value}});
    }
    return nlohmann::json{{"format", "adsa-kv-snapshot"},
                          {"version", 1},
                          {"policy", policy},
                          {"head_dim", head_dim},
                          {"entries", std::move(entries)}};
}

std::pair<KvCache, CachePolicy> snapshot_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string{}) != "adsa-kv-snapshot" || j.value("version", 0) != 1) {
        throw std::invalid_argument("not an adsa-kv-snapshot v1 document");
    }
    CachePolicy policy = j.at("policy").get<CachePolicy>();
    policy.validate();
    const auto head_dim = j.at("head_dim").get<std::size_t>();
    KvCache cache;
    for (const auto& je : j.at("entries")) {
        KvEntry e;
        e.position = je.at("position").get<std::uint64_t>();
        e.step = je.at("step").get<std::uint64_t>();
        e.key = je.at("key").get<Vec>();
        e.value = je.at("value").get<Vec>();
        if (e.key.size() != head_dim || e.value.size() != head_dim) {
            throw std::invalid_argument("snapshot entry has the wrong head dimension");
        }
        cache.append(std::move(e));
    }
    return {std::move(cache), policy};
}

}  // namespace adsa
