// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adsa/attention.hpp"
#include "adsa/kv_cache.hpp"
#include "json.hpp"

namespace adsa {

using TokenId = std::int64_t;

struct ModelConfig {
    std::size_t vocab_size = 64;
    std::size_t d_model = 32;
    std::size_t n_heads = 2;
    std::size_t n_layers = 2;
    /// Longest context the model may be asked to process (positions fed).
    std::size_t seq_capacity = 256;
    double theta_base = kDefaultRopeBase;
    std::uint64_t seed = 0;
    /// Accounting only: bytes per cached scalar on the device (2 = fp16).
    std::size_t bytes_per_scalar = 2;

    std::size_t head_dim() const { return d_model / n_heads; }
    std::size_t d_ff() const { return 4 * d_model; }

    /// Throws std::invalid_argument for zero sizes, d_model not divisible by
    /// n_heads, odd head dimension or non-positive theta_base.
    void validate() const;

    FootprintModel footprint() const { return {head_dim(), n_heads, n_layers, bytes_per_scalar}; }

    bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Pre-norm decoder block: RMSNorm -> MHA with RoPE -> residual,
/// RMSNorm -> W_down silu(W_up h) -> residual. All matrices row-major
/// (out x in).
struct LayerWeights {
    Vec attn_norm;  // d
    Vec wq, wk, wv, wo;  // d x d
    Vec mlp_norm;  // d
    Vec w_up;  // d_ff x d
    Vec w_down;  // d x d_ff
};

struct ModelWeights {
    Vec embedding;  // vocab x d
    std::vector<LayerWeights> layers;
    Vec final_norm;  // d
    Vec lm_head;  // vocab x d
};

/// Immutable after construction; safe to share across concurrent runs.
class Model {
public:
    /// Seeded initialisation. Weights come from one GaussianStream(seed) in
    /// this order: embedding (std 1); per layer wq, wk, wv, wo, w_up
    /// (std 1/sqrt(d)), w_down (std 1/sqrt(d_ff)); lm_head (std 1/sqrt(d)).
    /// Each tensor is filled row-major. Norm gains are 1 and not drawn.
    explicit Model(const ModelConfig& config);

    /// Externally supplied weights; shapes are checked against `config`.
    Model(const ModelConfig& config, ModelWeights weights);

    const ModelConfig& config() const { return config_; }
    const ModelWeights& weights() const { return weights_; }
    std::size_t parameter_count() const;

private:
    ModelConfig config_;
    ModelWeights weights_;
};

Model init_model(const ModelConfig& config);

/// Every tensor of `w` in the canonical order used for init and weight files.
std::vector<std::pair<std::string, std::vector<std::size_t>>> tensor_layout(const ModelConfig& c);
std::vector<const Vec*> tensor_list(const ModelWeights& w);
std::vector<Vec*> tensor_list(ModelWeights& w);

double rms_norm_eps();
/// x / sqrt(mean(x^2) + eps) * gain
Vec rms_norm(std::span<const double> x, std::span<const double> gain);
double silu(double x);

struct DecodeOptions {
    bool capture_weights = false;
    /// All heads of a layer share one eviction/selection decision computed
    /// from head-averaged similarity scores; otherwise each head decides alone.
    bool shared_selection = false;
};

/// What one decode step did, summarised over all (layer, head) caches.
struct StepSummary {
    std::uint64_t position = 0;
    std::size_t context_min = 0;
    std::size_t context_max = 0;
    double context_mean = 0.0;
    std::size_t occupancy = 0;
    std::uint64_t accounted_bytes = 0;
    std::optional<std::uint64_t> evicted_position;  ///< from layer 0, head 0
    std::size_t evictions = 0;  ///< over all caches
    std::vector<WeightRecord> weights;
};

/// Caches and position counter for one sequence. Owns its caches; the model
/// must outlive the session.
class DecodeSession {
public:
    DecodeSession(const Model& model, const CachePolicy& policy, DecodeOptions options = {});

    /// Runs `token` at the next position and returns the logits for the
    /// position after it. Throws std::out_of_range for tokens outside the
    /// vocabulary and std::length_error past seq_capacity.
    std::vector<double> decode_step(TokenId token);

    std::uint64_t next_position() const { return next_position_; }
    const StepSummary& last_step() const { return last_; }
    /// Moves the captured weight records of the last step out.
    std::vector<WeightRecord> take_weights() { return std::exchange(last_.weights, {}); }
    const KvCache& cache(std::size_t layer, std::size_t head) const;
    const CachePolicy& policy() const { return policy_; }
    std::uint64_t accounted_bytes() const;

private:
    void run_attention(std::size_t layer, const Vec& q, const Vec& k, const Vec& v, Vec& out, StepSummary& summary);

    const Model* model_;
    CachePolicy policy_;
    DecodeOptions options_;
    std::vector<KvCache> caches_;  // layer-major
    std::uint64_t next_position_ = 0;
    StepSummary last_;
};

inline std::vector<double> decode_step(DecodeSession& session, TokenId token) {
    return session.decode_step(token);
}

struct DecodeTrace {
    std::size_t step = 0;
    std::uint64_t position = 0;  ///< position of the sampled token
    TokenId token = 0;
    std::size_t context_min = 0;
    double context_mean = 0.0;
    std::size_t context_max = 0;
    std::size_t occupancy = 0;
    std::uint64_t accounted_bytes = 0;
    std::optional<std::uint64_t> evicted_position;
    std::size_t evictions = 0;
};

struct GenerateOptions {
    /// 0 selects greedy argmax (ties to the lower id).
    double temperature = 0.0;
    bool keep_logits = false;
    bool capture_weights = false;
    bool shared_selection = false;
    /// Tokens emitted verbatim for the first steps instead of sampling.
    std::vector<TokenId> forced_tokens;
};

struct GenerationRun {
    std::vector<TokenId> prompt;
    std::vector<TokenId> tokens;
    std::vector<DecodeTrace> trace;
    CachePolicy policy;
    std::uint64_t seed = 0;
    Archive archive;
    std::vector<std::vector<double>> logits;  ///< per generated token, if kept
    std::vector<WeightRecord> weights;  ///< every decode step, if captured
};

/**
 * Autoregressive generation through `policy`.
 *
 * The prompt is fed first; each of the `length` generated tokens is then
 * sampled from the latest logits and fed back (the last one is not fed).
 * Sampling uses Lcg64(sample_seed): generated token k consumes exactly the
 * k-th uniform u (forced and greedy steps included) and picks the first id
 * whose cumulative probability exceeds u.
 *
 * Throws std::invalid_argument for an empty prompt and std::length_error when
 * prompt.size() + length - 1 exceeds seq_capacity.
 */
GenerationRun generate(const Model& model, std::span<const TokenId> prompt, std::size_t length,
                       const CachePolicy& policy, std::uint64_t sample_seed, const GenerateOptions& options = {});

/// Number of leading tokens fixed for a given fraction: ceil(f * length),
/// with a 1e-9 guard so that f = (L-1)/L gives exactly L-1.
std::size_t fixed_prefix_length(double fixed_fraction, std::size_t length);

/// Reference run with seeds[0], then one run per seed whose first
/// fixed_prefix_length() tokens are copied from the reference. Returns the
/// per-seed runs. Throws std::invalid_argument unless 0 < fraction < 1.
std::vector<GenerationRun> fix_prefix_generate(const Model& model, std::span<const TokenId> prompt, std::size_t length,
                                               const CachePolicy& policy, double fixed_fraction,
                                               std::span<const std::uint64_t> seeds, GenerateOptions options = {});

/// Fraction of positions at which two equal-length sequences agree.
double token_overlap(std::span<const TokenId> a, std::span<const TokenId> b);

nlohmann::json run_to_json(const GenerationRun& run);

}  // namespace adsa
