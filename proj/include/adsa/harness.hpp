// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adsa/model.hpp"
#include "json.hpp"

namespace adsa::harness {

inline constexpr std::string_view kStepsCsvVersion = "# adsa-steps v1";
inline constexpr std::string_view kHistogramCsvVersion = "# adsa-histogram v1";
inline constexpr std::string_view kMemoryCsvVersion = "# adsa-memory v1";

struct NamedPolicy {
    std::string name;
    CachePolicy policy;
};

void to_json(nlohmann::json& j, const NamedPolicy& p);
void from_json(const nlohmann::json& j, NamedPolicy& p);

/// Parses "<name>=<n,m,K,C>". The variant is the longest of dense, window,
/// window_prefix, adsa that `name` starts with, followed by end-of-name or
/// '-' (e.g. "adsa-256=32,160,64,256"). Throws std::invalid_argument.
NamedPolicy parse_policy_flag(std::string_view flag);

struct ExperimentSpec {
    ModelConfig model;
    std::vector<NamedPolicy> policies;
    std::size_t length = 64;
    std::vector<TokenId> prompt{0};
    std::vector<std::uint64_t> seeds{0};
    double temperature = 0.0;
    std::filesystem::path out_dir = "adsa_out";
    bool capture_weights = false;
    bool shared_selection = false;
    std::size_t row_width = 24;
    std::vector<std::size_t> batch_sizes{1, 2, 4, 8, 16, 32, 64, 128};
    /// Load weights from this file instead of seeding them.
    std::optional<std::filesystem::path> weights_path;

    /// Positions the model processes per run: prompt + length - 1.
    std::size_t max_context() const { return prompt.size() + length - 1; }

    /// Throws std::invalid_argument (empty grid, length over seq_capacity,
    /// invalid policies, zero row width, ...).
    void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentSpec& s);
void from_json(const nlohmann::json& j, ExperimentSpec& s);

/// Reads and validates a JSON ExperimentSpec; errors name the file.
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Builds the model a spec describes (seeded, or loaded from weights_path).
Model build_model(const ExperimentSpec& spec);

struct Divergence {
    std::optional<std::size_t> first_step;  ///< first generated index that differs
    double hamming_fraction = 0.0;
};

Divergence token_divergence(std::span<const TokenId> run, std::span<const TokenId> reference);

/// Max |logit difference| over steps where both runs had fed identical tokens
/// and `run` attended to its whole history (context_min equals the
/// reference's context). Returns {deviation, number of such steps}.
std::pair<double, std::size_t> coinciding_logit_deviation(const GenerationRun& run, const GenerationRun& reference);

struct PolicyRow {
    std::string name;
    CachePolicy policy;
    std::uint64_t seed = 0;
    std::size_t peak_context = 0;
    double mean_context = 0.0;
    std::uint64_t peak_bytes = 0;
    double context_reduction = 0.0;  ///< 1 - peak_context / reference peak
    double memory_reduction = 0.0;   ///< 1 - peak_bytes / reference peak
    Divergence divergence;
    double logit_max_abs_dev = 0.0;
    std::size_t coinciding_steps = 0;
};

void to_json(nlohmann::json& j, const PolicyRow& r);

struct ComparisonReport {
    std::string reference_name;
    std::vector<PolicyRow> rows;
    std::vector<std::filesystem::path> outputs;
};

nlohmann::json report_to_json(const ComparisonReport& r, const ExperimentSpec& spec);

/// Row summarising `run` against a dense `reference` run of the same seed.
PolicyRow summarize(const std::string& name, const GenerationRun& run, const GenerationRun& reference);

/// One steps.csv line per trace record, without trailing newline.
std::string steps_csv_header();
std::string steps_csv_row(const std::string& policy_name, const GenerationRun& run, const DecodeTrace& t);

/**
 * Generates once per (policy, seed) and compares each run with a full dense
 * reference of the same seed. The reference is the first grid policy that
 * is dense with capacity >= max_context; otherwise an implicit "reference"
 * row is added. Writes steps.csv and summary.json (and histogram.csv when
 * weights are captured) into spec.out_dir when `write` is set.
 */
ComparisonReport run_compare(const ExperimentSpec& spec, bool write = true);

struct AblationReport {
    std::string base_name;
    ComparisonReport comparison;  ///< rows: full, prefix_off, select_off, local_off (+ reference)
    /// Per seed, the removal with the largest divergence from dense.
    std::vector<std::string> largest_removal;
};

/// Ranks divergence: earlier first-divergence step is larger, then larger
/// Hamming fraction, then larger coinciding-logit deviation.
bool diverges_more(const PolicyRow& a, const PolicyRow& b);

/// Full adsa, prefix-off (n=0), select-off (K=0) and local-off (m=0) variants
/// of the first adsa policy in the grid.
AblationReport run_ablation(const ExperimentSpec& spec, bool write = true);

struct LocalityHistogram {
    std::size_t row_width = 0;
    std::size_t records = 0;
    /// distance_mass[d]: mean attention mass on keys d positions back.
    std::vector<double> distance_mass;
    /// column_mass[r]: mean mass on the key in the same column r rows back
    /// (distance r * row_width); index 0 unused.
    std::vector<double> column_mass;
};

/// Aggregates captured weights by query-key distance. Throws
/// std::invalid_argument if `records` is empty (capture was off).
LocalityHistogram locality_report(std::span<const WeightRecord> records, std::size_t row_width);
LocalityHistogram locality_report(const GenerationRun& run, std::size_t row_width);

std::string histogram_csv(const std::vector<std::pair<std::string, LocalityHistogram>>& hists);

struct MemoryPoint {
    std::string policy;
    std::size_t batch = 0;
    std::uint64_t cache_bytes = 0;
    std::uint64_t model_bytes = 0;
    std::uint64_t total_bytes() const { return cache_bytes + model_bytes; }
};

struct MemoryReport {
    std::vector<MemoryPoint> points;
    /// Per policy: smallest batch whose cache bytes exceed the model bytes.
    std::vector<std::pair<std::string, std::uint64_t>> crossover;
    std::vector<std::filesystem::path> outputs;
};

/// Peak KV occupancy of one sequence under `policy` in a run of the spec.
std::size_t peak_occupancy(const ExperimentSpec& spec, const CachePolicy& policy);

/// Smallest batch b with b * per_sequence_bytes > model_bytes.
std::uint64_t crossover_batch(std::uint64_t per_sequence_bytes, std::uint64_t model_bytes);

MemoryReport memory_report(const ExperimentSpec& spec, bool write = true);

/// Locality histograms for each grid policy (first seed, capture forced on).
std::vector<std::pair<std::string, LocalityHistogram>> run_locality(const ExperimentSpec& spec, bool write = true);

/// Percentage with a fixed number of decimals, e.g. format_percent(-0.5556, 1) == "-55.6%".
std::string format_percent(double fraction, int decimals = 1);

}  // namespace adsa::harness
