// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#include "adsa/model.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iterator>
#include <stdexcept>
#include <string>

#include "adsa/kernels.hpp"
#include "adsa/rng.hpp"

namespace adsa {

void ModelConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid model config: " + what); };
    if (vocab_size == 0 || d_model == 0 || n_heads == 0 || n_layers == 0 || seq_capacity == 0) {
        fail("all sizes must be positive");
    }
    if (d_model % n_heads != 0) {
        fail("d_model must be divisible by n_heads");
    }
    if (head_dim() % 2 != 0) {
        fail("head dimension must be even for rotary encoding");
    }
    if (!(theta_base > 0.0)) {
        fail("theta_base must be positive");
    }
    if (bytes_per_scalar == 0) {
        fail("bytes_per_scalar must be positive");
    }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
    j = nlohmann::json{{"vocab_size", c.vocab_size}, {"d_model", c.d_model},
                       {"n_heads", c.n_heads},       {"n_layers", c.n_layers},
                       {"seq_capacity", c.seq_capacity}, {"theta_base", c.theta_base},
                       {"seed", c.seed},             {"bytes_per_scalar", c.bytes_per_scalar}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
    const ModelConfig d;
    c.vocab_size = j.value("vocab_size", d.vocab_size);
    c.d_model = j.value("d_model", d.d_model);
    c.n_heads = j.value("n_heads", d.n_heads);
    c.n_layers = j.value("n_layers", d.n_layers);
    c.seq_capacity = j.value("seq_capacity", d.seq_capacity);
    c.theta_base = j.value("theta_base", d.theta_base);
    c.seed = j.value("seed", d.seed);
    c.bytes_per_scalar = j.value("bytes_per_scalar", d.bytes_per_scalar);
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> tensor_layout(const ModelConfig& c) {
    const std::size_t d = c.d_model;
    const std::size_t f = c.d_ff();
    std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
    out.push_back({"embedding", {c.vocab_size, d}});
    for (std::size_t l = 0; l < c.n_layers; ++l) {
        const std::string p = "layers." + std::to_string(l) + ".";
        out.push_back({p + "attn_norm", {d}});
        out.push_back({p + "wq", {d, d}});
        out.push_back({p + "wk", {d, d}});
        out.push_back({p + "wv", {d, d}});
        out.push_back({p + "wo", {d, d}});
        out.push_back({p + "mlp_norm", {d}});
        out.push_back({p + "w_up", {f, d}});
        out.push_back({p + "w_down", {d, f}});
    }
    out.push_back({"final_norm", {d}});
    out.push_back({"lm_head", {c.vocab_size, d}});
    return out;
}

namespace {

template <typename W, typename P>
std::vector<P> collect(W& w) {
    std::vector<P> out{&w.embedding};
    for (auto& l : w.layers) {
        for (P t : {&l.attn_norm, &l.wq, &l.wk, &l.wv, &l.wo, &l.mlp_norm, &l.w_up, &l.w_down}) {
            out.push_back(t);
        }
    }
    out.push_back(&w.final_norm);
    out.push_back(&w.lm_head);
    return out;
}

std::size_t element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t s : shape) {
        n *= s;
    }
    return n;
}

Vec draw(GaussianStream& g, std::size_t n, double std_dev) {
    Vec out(n);
    for (double& x : out) {
        x = std_dev * g.next();
    }
    return out;
}

}  // namespace

std::vector<const Vec*> tensor_list(const ModelWeights& w) {
    return collect<const ModelWeights, const Vec*>(w);
}

std::vector<Vec*> tensor_list(ModelWeights& w) {
    return collect<ModelWeights, Vec*>(w);
}

Model::Model(const ModelConfig& config) : config_(config) {
    config_.validate();
    const std::size_t d = config_.d_model;
    const std::size_t f = config_.d_ff();
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    const double sf = 1.0 / std::sqrt(static_cast<double>(f));

    GaussianStream g(config_.seed);
    weights_.embedding = draw(g, config_.vocab_size * d, 1.0);
    weights_.layers.resize(config_.n_layers);
    for (LayerWeights& l : weights_.layers) {
        l.attn_norm.assign(d, 1.0);
        l.wq = draw(g, d * d, sd);
        l.wk = draw(g, d * d, sd);
        l.wv = draw(g, d * d, sd);
        l.wo = draw(g, d * d, sd);
        l.mlp_norm.assign(d, 1.0);
        l.w_up = draw(g, f * d, sd);
        l.w_down = draw(g, d * f, sf);
    }
    weights_.final_norm.assign(d, 1.0);
    weights_.lm_head = draw(g, config_.vocab_size * d, sd);
}

Model::Model(const ModelConfig& config, ModelWeights weights) : config_(config), weights_(std::move(weights)) {
    config_.validate();
    if (weights_.layers.size() != config_.n_layers) {
        throw std::invalid_argument("model weights: layer count does not match config");
    }
    const auto layout = tensor_layout(config_);
    const auto tensors = tensor_list(weights_);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (tensors[i]->size() != element_count(layout[i].second)) {
            throw std::invalid_argument("model weights: tensor '" + layout[i].first + "' has the wrong size");
        }
    }
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const Vec* t : tensor_list(weights_)) {
        n += t->size();
    }
    return n;
}

Model init_model(const ModelConfig& config) {
    return Model(config);
}

double rms_norm_eps() {
    return 1e-6;
}

Vec rms_norm(std::span<const double> x, std::span<const double> gain) {
    double ss = 0.0;
    for (double v : x) {
        ss += v * v;
    }
    const double inv = 1.0 / std::sqrt(ss / static_cast<double>(x.size()) + rms_norm_eps());
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] * inv * gain[i];
    }
    return out;
}

double silu(double x) {
    return x / (1.0 + std::exp(-x));
}

DecodeSession::DecodeSession(const Model& model, const CachePolicy& policy, DecodeOptions options)
    : model_(&model), policy_(policy), options_(options) {
    policy_.validate();
    caches_.resize(model.config().n_layers * model.config().n_heads);
}

const KvCache& DecodeSession::cache(std::size_t layer, std::size_t head) const {
    const std::size_t h = model_->config().n_heads;
    if (layer >= model_->config().n_layers || head >= h) {
        throw std::out_of_range("DecodeSession::cache: no such layer/head");
    }
    return caches_[layer * h + head];
}

std::uint64_t DecodeSession::accounted_bytes() const {
    return memory_footprint(caches_.front().size(), model_->config().footprint());
}

namespace {

Vec head_slice(const Vec& x, std::size_t head, std::size_t hd) {
    return Vec(x.begin() + static_cast<std::ptrdiff_t>(head * hd),
               x.begin() + static_cast<std::ptrdiff_t>((head + 1) * hd));
}

/// Mean over heads of each head's previous-region averages.
std::vector<double> shared_scores(std::span<KvCache> heads, const CachePolicy& policy) {
    std::vector<double> acc;
    for (const KvCache& c : heads) {
        const RegionView view = partition(c, policy);
        const SimilarityStats s = similarity_stats(view.previous);
        if (acc.empty()) {
            acc.assign(s.avg().begin(), s.avg().end());
        } else {
            for (std::size_t i = 0; i < acc.size(); ++i) {
                acc[i] += s.avg()[i];
            }
        }
    }
    for (double& a : acc) {
        a /= static_cast<double>(heads.size());
    }
    return acc;
}

}  // namespace

void DecodeSession::run_attention(std::size_t layer, const Vec& q, const Vec& k, const Vec& v, Vec& out,
                                  StepSummary& summary) {
    const ModelConfig& cfg = model_->config();
    const std::size_t n_heads = cfg.n_heads;
    const std::size_t hd = cfg.head_dim();
    const std::uint64_t pos = next_position_;
    std::span<KvCache> heads(caches_.data() + layer * n_heads, n_heads);

    std::vector<double> evict_scores;
    if (options_.shared_selection && heads.front().size() >= policy_.capacity) {
        evict_scores = shared_scores(heads, policy_);
    }

    std::vector<std::optional<std::uint64_t>> evicted(n_heads);
    std::vector<AttentionStep> steps(n_heads);
    std::vector<Vec> queries(n_heads);

    // Phase 1: rotate and insert. Per-head work is independent.
    std::exception_ptr error;
    const std::int64_t nh = static_cast<std::int64_t>(n_heads);
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled() && nh > 1)
    for (std::int64_t h = 0; h < nh; ++h) {
        try {
            queries[h] = rope_rotate(head_slice(q, h, hd), pos, cfg.theta_base);
            KvEntry e;
            e.key = rope_rotate(head_slice(k, h, hd), pos, cfg.theta_base);
            e.value = head_slice(v, h, hd);
            e.position = pos;
            e.step = pos;
            evicted[h] = insert_with_eviction(heads[h], std::move(e), policy_, evict_scores);
        } catch (...) {
#pragma omp critical(adsa_decode_error)
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }

    std::vector<double> select_scores;
    if (options_.shared_selection && policy_.variant == Variant::adsa) {
        const RegionSizes r = region_sizes(heads.front().size(), policy_);
        if (r.previous > policy_.k_select && policy_.k_select > 0) {
            select_scores = shared_scores(heads, policy_);
        }
    }

    // Phase 2: attend.
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled() && nh > 1)
    for (std::int64_t h = 0; h < nh; ++h) {
        try {
            steps[h] = attend(queries[h], pos, heads[h], policy_, options_.capture_weights, select_scores);
        } catch (...) {
#pragma omp critical(adsa_decode_error)
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }

    out.assign(cfg.d_model, 0.0);
    for (std::size_t h = 0; h < n_heads; ++h) {
        std::copy(steps[h].output.begin(), steps[h].output.end(), out.begin() + static_cast<std::ptrdiff_t>(h * hd));
        const std::size_t len = steps[h].context_len;
        summary.context_min = std::min(summary.context_min, len);
        summary.context_max = std::max(summary.context_max, len);
        summary.context_mean += static_cast<double>(len);
        if (evicted[h]) {
            ++summary.evictions;
            if (layer == 0 && h == 0) {
                summary.evicted_position = evicted[h];
            }
        }
        if (options_.capture_weights) {
            summary.weights.push_back(
                WeightRecord{layer, h, pos, std::move(steps[h].used_positions), std::move(steps[h].weights)});
        }
    }
}

std::vector<double> DecodeSession::decode_step(TokenId token) {
    const ModelConfig& cfg = model_->config();
    const ModelWeights& w = model_->weights();
    if (token < 0 || static_cast<std::size_t>(token) >= cfg.vocab_size) {
        throw std::out_of_range("decode_step: token id " + std::to_string(token) + " outside vocabulary of " +
                                std::to_string(cfg.vocab_size));
    }
    if (next_position_ >= cfg.seq_capacity) {
        throw std::length_error("decode_step: sequence capacity " + std::to_string(cfg.seq_capacity) + " exhausted");
    }
    const std::size_t d = cfg.d_model;
    const std::size_t f = cfg.d_ff();

    StepSummary summary;
    summary.position = next_position_;
    summary.context_min = static_cast<std::size_t>(-1);

    Vec x(w.embedding.begin() + static_cast<std::ptrdiff_t>(token * d),
          w.embedding.begin() + static_cast<std::ptrdiff_t>((token + 1) * d));
    Vec q(d), k(d), v(d), attn(d), proj(d), up(f), down(d);

    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        const LayerWeights& lw = w.layers[l];
        const Vec h = rms_norm(x, lw.attn_norm);
        kernels::matvec(lw.wq, d, d, h, q);
        kernels::matvec(lw.wk, d, d, h, k);
        kernels::matvec(lw.wv, d, d, h, v);
        run_attention(l, q, k, v, attn, summary);
        kernels::matvec(lw.wo, d, d, attn, proj);
        for (std::size_t i = 0; i < d; ++i) {
            x[i] += proj[i];
        }

        const Vec h2 = rms_norm(x, lw.mlp_norm);
        kernels::matvec(lw.w_up, f, d, h2, up);
        for (double& u : up) {
            u = silu(u);
        }
        kernels::matvec(lw.w_down, d, f, up, down);
        for (std::size_t i = 0; i < d; ++i) {
            x[i] += down[i];
        }
    }

    const Vec hf = rms_norm(x, w.final_norm);
    std::vector<double> logits(cfg.vocab_size);
    kernels::matvec(w.lm_head, cfg.vocab_size, d, hf, logits);

    summary.context_mean /= static_cast<double>(cfg.n_layers * cfg.n_heads);
    summary.occupancy = caches_.front().size();
    summary.accounted_bytes = accounted_bytes();
    last_ = std::move(summary);
    ++next_position_;
    return logits;
}

namespace {

TokenId sample_token(std::span<const double> logits, double temperature, double u) {
    if (temperature <= 0.0) {
        return static_cast<TokenId>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    }
    std::vector<double> scaled(logits.begin(), logits.end());
    for (double& s : scaled) {
        s /= temperature;
    }
    const std::vector<double> p = softmax(scaled);
    double cum = 0.0;
    TokenId last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            last_positive = static_cast<TokenId>(i);
        }
        cum += p[i];
        if (cum > u) {
            return static_cast<TokenId>(i);
        }
    }
    return last_positive;
}

}  // namespace

GenerationRun generate(const Model& model, std::span<const TokenId> prompt, std::size_t length,
                       const CachePolicy& policy, std::uint64_t sample_seed, const GenerateOptions& options) {
    if (prompt.empty()) {
        throw std::invalid_argument("generate: prompt must not be empty");
    }
    if (length == 0) {
        throw std::invalid_argument("generate: length must be positive");
    }
    if (prompt.size() + length - 1 > model.config().seq_capacity) {
        throw std::length_error("generate: prompt + length - 1 = " + std::to_string(prompt.size() + length - 1) +
                                " exceeds seq_capacity " + std::to_string(model.config().seq_capacity));
    }

    GenerationRun run;
    run.prompt.assign(prompt.begin(), prompt.end());
    run.policy = policy;
    run.seed = sample_seed;
    run.tokens.reserve(length);
    run.trace.reserve(length);

    DecodeSession session(model, policy, DecodeOptions{options.capture_weights, options.shared_selection});
    Lcg64 rng(sample_seed);

    auto absorb_weights = [&] {
        if (options.capture_weights) {
            auto ws = session.take_weights();
            std::move(ws.begin(), ws.end(), std::back_inserter(run.weights));
        }
    };

    std::vector<double> logits;
    for (std::size_t i = 0; i < prompt.size(); ++i) {
        run.archive.append(i, prompt[i]);
        logits = session.decode_step(prompt[i]);
        absorb_weights();
    }

    for (std::size_t k = 0; k < length; ++k) {
        const double u = rng.uniform();
        const TokenId token =
            k < options.forced_tokens.size() ? options.forced_tokens[k] : sample_token(logits, options.temperature, u);
        const StepSummary& s = session.last_step();
        const std::uint64_t pos = prompt.size() + k;

        DecodeTrace t;
        t.step = k;
        t.position = pos;
        t.token = token;
        t.context_min = s.context_min;
        t.context_mean = s.context_mean;
        t.context_max = s.context_max;
        t.occupancy = s.occupancy;
        t.accounted_bytes = s.accounted_bytes;
        t.evicted_position = s.evicted_position;
        t.evictions = s.evictions;
        run.trace.push_back(t);
        run.tokens.push_back(token);
        run.archive.append(pos, token);
        if (options.keep_logits) {
            run.logits.push_back(logits);
        }
        if (k + 1 < length) {
            logits = session.decode_step(token);
            absorb_weights();
        }
    }
    return run;
}

std::size_t fixed_prefix_length(double fixed_fraction, std::size_t length) {
    if (!(fixed_fraction > 0.0 && fixed_fraction < 1.0)) {
        throw std::invalid_argument("fixed_fraction must lie strictly between 0 and 1");
    }
    const double raw = std::ceil(fixed_fraction * static_cast<double>(length) - 1e-9);
    return std::min(length, static_cast<std::size_t>(std::max(0.0, raw)));
}

std::vector<GenerationRun> fix_prefix_generate(const Model& model, std::span<const TokenId> prompt, std::size_t length,
                                               const CachePolicy& policy, double fixed_fraction,
                                               std::span<const std::uint64_t> seeds, GenerateOptions options) {
    const std::size_t n_fixed = fixed_prefix_length(fixed_fraction, length);
    if (seeds.empty()) {
        throw std::invalid_argument("fix_prefix_generate: need at least one seed");
    }
    options.forced_tokens.clear();
    const GenerationRun reference = generate(model, prompt, length, policy, seeds.front(), options);
    options.forced_tokens.assign(reference.tokens.begin(),
                                 reference.tokens.begin() + static_cast<std::ptrdiff_t>(n_fixed));

    std::vector<GenerationRun> runs;
    runs.reserve(seeds.size());
    for (std::uint64_t seed : seeds) {
        runs.push_back(generate(model, prompt, length, policy, seed, options));
    }
    return runs;
}

double token_overlap(std::span<const TokenId> a, std::span<const TokenId> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("token_overlap: sequences differ in length");
    }
    if (a.empty()) {
        return 1.0;
    }
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same += a[i] == b[i] ? 1 : 0;
    }
    return static_cast<double>(same) / static_cast<double>(a.size());
}

nlohmann::json run_to_json(const GenerationRun& run) {
    nlohmann::json trace = nlohmann::json::array();
    for (const DecodeTrace& t : run.trace) {
        trace.push_back({{"step", t.step},
                         {"position", t.position},
                         {"token", t.token},
                         {"context_min", t.context_min},
                         {"context_mean", t.context_mean},
                         {"context_max", t.context_max},
                         {"occupancy", t.occupancy},
                         {"accounted_bytes", t.accounted_bytes},
                         {"evicted_position", t.evicted_position ? nlohmann::json(*t.evicted_position) : nullptr},
                         {"evictions", t.evictions}});
    }
    return nlohmann::json{{"format", "adsa-run"},   {"version", 1},          {"seed", run.seed},
                          {"policy", run.policy},   {"prompt", run.prompt},  {"tokens", run.tokens},
                          {"archive_length", run.archive.size()}, {"trace", std::move(trace)}};
}

}  // namespace adsa
