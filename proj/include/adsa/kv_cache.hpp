// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "adsa/core_math.hpp"
#include "json.hpp"

namespace adsa {

/// Which part of the cache a query is allowed to see.
enum class Variant {
    dense,          ///< everything in the cache
    window,         ///< the last m_local entries
    window_prefix,  ///< the first n_prefix entries plus the last m_local
    adsa,           ///< prefix + TopK of the previous region + local
};

std::string_view to_string(Variant v);
/// Throws std::invalid_argument on unknown names.
Variant parse_variant(std::string_view name);

/**
 * Cache sizing and attention regime.
 *
 * The cache is split by position into a protected prefix (first n_prefix
 * entries), a protected local window (last m_local entries), and the
 * "previous" region in between. Selection (adsa) keeps k_select previous
 * entries per query; eviction removes one previous entry whenever an insert
 * would exceed `capacity`.
 */
struct CachePolicy {
    std::size_t n_prefix = 0;
    std::size_t m_local = 1;
    std::size_t k_select = 0;
    std::size_t capacity = 1;
    Variant variant = Variant::dense;

    /// Throws std::invalid_argument when the sizes are inconsistent or the
    /// policy could produce an empty attention context.
    void validate() const;

    /// Dense attention over an unbounded-in-practice cache of `capacity`.
    static CachePolicy make_dense(std::size_t capacity);

    bool operator==(const CachePolicy&) const = default;
};

void to_json(nlohmann::json& j, const CachePolicy& p);
void from_json(const nlohmann::json& j, CachePolicy& p);

/// One cached token of one head.
struct KvEntry {
    Vec key;  ///< already rotated with `position`
    Vec value;
    std::uint64_t position = 0;
    std::uint64_t step = 0;  ///< decode step that inserted it
};

/// Entries of one (layer, head), kept sorted by strictly increasing position.
class KvCache {
public:
    KvCache() = default;

    std::span<const KvEntry> entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::optional<std::uint64_t> last_position() const;

    /// Throws std::invalid_argument unless entry.position is past every
    /// cached position.
    void append(KvEntry entry);

    KvEntry erase_at(std::size_t index);

private:
    std::vector<KvEntry> entries_;
};

struct RegionSizes {
    std::size_t prefix = 0;
    std::size_t previous = 0;
    std::size_t local = 0;
};

/// Prefix claims first, the local window takes what remains, the previous
/// region gets the rest.
RegionSizes region_sizes(std::size_t occupancy, const CachePolicy& policy);

/// Contiguous views into the cache; valid until the cache is modified.
struct RegionView {
    std::span<const KvEntry> prefix;
    std::span<const KvEntry> previous;
    std::span<const KvEntry> local;

    /// Index of previous.front() within the cache.
    std::size_t previous_offset() const { return prefix.size(); }
};

RegionView partition(const KvCache& cache, const CachePolicy& policy);

/// Pairwise cosine similarity of the value vectors of a region together with
/// each token's average similarity to the others.
class SimilarityStats {
public:
    SimilarityStats() = default;
    SimilarityStats(std::size_t n, std::vector<double> matrix, std::vector<double> avg);

    std::size_t size() const { return n_; }
    double at(std::size_t i, std::size_t j) const { return matrix_[i * n_ + j]; }
    std::span<const double> matrix() const { return matrix_; }
    std::span<const double> avg() const { return avg_; }

private:
    std::size_t n_ = 0;
    std::vector<double> matrix_;
    std::vector<double> avg_;
};

/// S_ij = cos(v_i, v_j) for i != j, S_ii = 0, avg_i = sum_j S_ij / (L - 1).
/// Regions with fewer than two entries give all-zero averages.
SimilarityStats similarity_stats(std::span<const KvEntry> region);

/// Indices of the k lowest scores, ties to the lower index, returned in
/// ascending index order. Throws std::invalid_argument if k > scores.size().
std::vector<std::size_t> lowest_k(std::span<const double> scores, std::size_t k);

/// TopK-V filtering: the k previous-region tokens with the lowest average
/// value similarity. Minimising the sum of averages over all k-subsets is
/// separable, so this is exactly the k smallest. Indices are into `previous`.
std::vector<std::size_t> topk_select(std::span<const KvEntry> previous, const SimilarityStats& stats, std::size_t k);

/// Indices into cache.entries() that a query may attend to under `policy`,
/// ascending. For adsa, `previous_scores` (one per previous-region entry)
/// replaces the per-cache similarity averages; pass an empty span to compute
/// them from this cache.
std::vector<std::size_t> effective_context(const KvCache& cache, const CachePolicy& policy,
                                           std::span<const double> previous_scores = {});

/// Index of the entry an insert would evict, or nullopt while the cache has
/// room. The victim is the previous-region entry with the highest average
/// similarity (ties to the lower position). When the previous region is
/// empty the oldest local entry goes; with no local window either, the newest
/// prefix entry goes.
std::optional<std::size_t> eviction_candidate(const KvCache& cache, const CachePolicy& policy,
                                              std::span<const double> previous_scores = {});

/// Appends `entry`, first evicting per eviction_candidate when full.
/// Returns the evicted position, if any.
std::optional<std::uint64_t> insert_with_eviction(KvCache& cache, KvEntry entry, const CachePolicy& policy,
                                                  std::span<const double> previous_scores = {});

/// Host-side record of every token produced, outside the cache budget.
class Archive {
public:
    struct Record {
        std::uint64_t position = 0;
        std::int64_t token = 0;
    };

    /// Returns the new length. Throws std::invalid_argument unless position
    /// is past the last archived one.
    std::size_t append(std::uint64_t position, std::int64_t token);

    std::size_t size() const { return records_.size(); }
    std::span<const Record> records() const { return records_; }

private:
    std::vector<Record> records_;
};

/// Accounted (not measured) device bytes for the KV cache.
struct FootprintModel {
    std::size_t head_dim = 0;
    std::size_t n_heads = 0;
    std::size_t n_layers = 0;
    std::size_t bytes_per_scalar = 2;

    /// Key plus value for every layer and head.
    std::uint64_t bytes_per_token() const {
        return 2ULL * head_dim * bytes_per_scalar * n_layers * n_heads;
    }
};

std::uint64_t memory_footprint(std::size_t occupancy, const FootprintModel& fm);

inline std::uint64_t memory_footprint(const KvCache& cache, const FootprintModel& fm) {
    return memory_footprint(cache.size(), fm);
}

/// JSON snapshot: {"format":"adsa-kv-snapshot","version":1,"policy":{...},
/// "head_dim":d,"entries":[{"position","step","key":[..],"value":[..]}]}.
nlohmann::json snapshot_to_json(const KvCache& cache, const CachePolicy& policy);
std::pair<KvCache, CachePolicy> snapshot_from_json(const nlohmann::json& j);

}  // namespace adsa
