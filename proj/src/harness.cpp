// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#include "adsa/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "adsa/kernels.hpp"
#include "adsa/weights_io.hpp"

namespace adsa::harness {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    os << content;
    if (!os.flush()) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

/// Runs `fn(i)` for i in [0, n), in parallel when enabled; rethrows the
/// first exception.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::exception_ptr error;
    const std::int64_t end = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1) if (kernels::parallel_enabled() && n > 1)
    for (std::int64_t i = 0; i < end; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(adsa_harness_error)
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

struct Grid {
    std::vector<NamedPolicy> policies;  ///< rows to report, in order
    std::size_t reference = 0;          ///< index of the dense reference
};

Grid resolve_grid(const ExperimentSpec& spec) {
    Grid g;
    g.policies = spec.policies;
    for (std::size_t i = 0; i < g.policies.size(); ++i) {
        const CachePolicy& p = g.policies[i].policy;
        if (p.variant == Variant::dense && p.capacity >= spec.max_context()) {
            g.reference = i;
            return g;
        }
    }
    g.policies.push_back({"reference", CachePolicy::make_dense(spec.max_context())});
    g.reference = g.policies.size() - 1;
    return g;
}

GenerateOptions generate_options(const ExperimentSpec& spec, bool capture) {
    GenerateOptions o;
    o.temperature = spec.temperature;
    o.keep_logits = true;
    o.capture_weights = capture;
    o.shared_selection = spec.shared_selection;
    return o;
}

struct GridRuns {
    Grid grid;
    /// runs[seed_index][policy_index]
    std::vector<std::vector<GenerationRun>> runs;
};

GridRuns execute_grid(const Model& model, const ExperimentSpec& spec, const Grid& grid, bool capture) {
    GridRuns out{grid, {}};
    const std::size_t n_pol = grid.policies.size();
    out.runs.assign(spec.seeds.size(), std::vector<GenerationRun>(n_pol));
    const GenerateOptions opts = generate_options(spec, capture);
    parallel_for(spec.seeds.size() * n_pol, [&](std::size_t job) {
        const std::size_t s = job / n_pol;
        const std::size_t p = job % n_pol;
        out.runs[s][p] = generate(model, spec.prompt, spec.length, grid.policies[p].policy, spec.seeds[s], opts);
    });
    return out;
}

ComparisonReport build_report(const GridRuns& gr) {
    ComparisonReport rep;
    rep.reference_name = gr.grid.policies[gr.grid.reference].name;
    for (std::size_t p = 0; p < gr.grid.policies.size(); ++p) {
        for (std::size_t s = 0; s < gr.runs.size(); ++s) {
            rep.rows.push_back(summarize(gr.grid.policies[p].name, gr.runs[s][p], gr.runs[s][gr.grid.reference]));
        }
    }
    return rep;
}

std::string steps_csv(const GridRuns& gr) {
    std::string out;
    out += kStepsCsvVersion;
    out += '\n';
    out += steps_csv_header();
    out += '\n';
    for (std::size_t p = 0; p < gr.grid.policies.size(); ++p) {
        for (const auto& seed_runs : gr.runs) {
            const GenerationRun& run = seed_runs[p];
            for (const DecodeTrace& t : run.trace) {
                out += steps_csv_row(gr.grid.policies[p].name, run, t);
                out += '\n';
            }
        }
    }
    return out;
}

bool starts_with_variant(std::string_view name, std::string_view variant) {
    if (name.substr(0, variant.size()) != variant) {
        return false;
    }
    return name.size() == variant.size() || name[variant.size()] == '-';
}

}  // namespace

void to_json(nlohmann::json& j, const NamedPolicy& p) {
    j = p.policy;
    j["name"] = p.name;
}

void from_json(const nlohmann::json& j, NamedPolicy& p) {
    p.policy = j.get<CachePolicy>();
    p.name = j.value("name", std::string(to_string(p.policy.variant)));
}

NamedPolicy parse_policy_flag(std::string_view flag) {
    const auto eq = flag.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw std::invalid_argument("--policy expects <name>=<n,m,K,C>, got '" + std::string(flag) + "'");
    }
    const std::string_view name = flag.substr(0, eq);
    std::optional<Variant> variant;
    std::size_t best_len = 0;
    for (Variant v : {Variant::dense, Variant::window, Variant::window_prefix, Variant::adsa}) {
        const std::string_view vn = to_string(v);
        if (vn.size() > best_len && starts_with_variant(name, vn)) {
            variant = v;
            best_len = vn.size();
        }
    }
    if (!variant) {
        throw std::invalid_argument("--policy name '" + std::string(name) +
                                    "' must start with dense, window, window_prefix or adsa");
    }
    std::vector<std::size_t> nums;
    std::string_view rest = flag.substr(eq + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view tok = rest.substr(0, comma);
        std::size_t v = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
            throw std::invalid_argument("--policy value '" + std::string(tok) + "' is not a non-negative integer");
        }
        nums.push_back(v);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    if (nums.size() != 4) {
        throw std::invalid_argument("--policy expects exactly four numbers n,m,K,C in '" + std::string(flag) + "'");
    }
    NamedPolicy np{std::string(name), CachePolicy{nums[0], nums[1], nums[2], nums[3], *variant}};
    np.policy.validate();
    return np;
}

void ExperimentSpec::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid experiment spec: " + what); };
    model.validate();
    if (policies.empty()) {
        fail("policy grid is empty");
    }
    for (const NamedPolicy& p : policies) {
        if (p.name.empty()) {
            fail("policy names must be non-empty");
        }
        p.policy.validate();
    }
    if (length == 0) {
        fail("length must be positive");
    }
    if (prompt.empty()) {
        fail("prompt must not be empty");
    }
    for (TokenId t : prompt) {
        if (t < 0 || static_cast<std::size_t>(t) >= model.vocab_size) {
            fail("prompt token " + std::to_string(t) + " outside vocabulary");
        }
    }
    if (max_context() > model.seq_capacity) {
        fail("prompt + length - 1 = " + std::to_string(max_context()) + " exceeds seq_capacity " +
             std::to_string(model.seq_capacity));
    }
    if (seeds.empty()) {
        fail("need at least one seed");
    }
    if (row_width == 0) {
        fail("row_width must be positive");
    }
    if (temperature < 0.0) {
        fail("temperature must be non-negative");
    }
    for (std::size_t b : batch_sizes) {
        if (b == 0) {
            fail("batch sizes must be >= 1");
        }
    }
}

void to_json(nlohmann::json& j, const ExperimentSpec& s) {
    j = nlohmann::json{{"model", s.model},
                       {"policies", s.policies},
                       {"length", s.length},
                       {"prompt", s.prompt},
                       {"seeds", s.seeds},
                       {"temperature", s.temperature},
                       {"out_dir", s.out_dir.string()},
                       {"capture_weights", s.capture_weights},
                       {"shared_selection", s.shared_selection},
                       {"row_width", s.row_width},
                       {"batch_sizes", s.batch_sizes}};
    if (s.weights_path) {
        j["weights"] = s.weights_path->string();
    }
}

void from_json(const nlohmann::json& j, ExperimentSpec& s) {
    const ExperimentSpec d;
    s.model = j.value("model", d.model);
    s.policies = j.value("policies", d.policies);
    s.length = j.value("length", d.length);
    s.prompt = j.value("prompt", d.prompt);
    s.seeds = j.value("seeds", d.seeds);
    s.temperature = j.value("temperature", d.temperature);
    s.out_dir = j.value("out_dir", d.out_dir.string());
    s.capture_weights = j.value("capture_weights", d.capture_weights);
    s.shared_selection = j.value("shared_selection", d.shared_selection);
    s.row_width = j.value("row_width", d.row_width);
    s.batch_sizes = j.value("batch_sizes", d.batch_sizes);
    if (j.contains("weights")) {
        s.weights_path = j.at("weights").get<std::string>();
    }
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    ExperimentSpec spec;
    try {
        spec = nlohmann::json::parse(is).get<ExperimentSpec>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return spec;
}

Model build_model(const ExperimentSpec& spec) {
    if (spec.weights_path) {
        Model m = load_weights(*spec.weights_path);
        if (m.config().vocab_size != spec.model.vocab_size || m.config().d_model != spec.model.d_model) {
            throw std::invalid_argument("weights file " + spec.weights_path->string() +
                                        " does not match the spec's model config");
        }
        return m;
    }
    return Model(spec.model);
}

Divergence token_divergence(std::span<const TokenId> run, std::span<const TokenId> reference) {
    if (run.size() != reference.size()) {
        throw std::invalid_argument("token_divergence: runs differ in length");
    }
    Divergence d;
    std::size_t diff = 0;
    for (std::size_t i = 0; i < run.size(); ++i) {
        if (run[i] != reference[i]) {
            ++diff;
            if (!d.first_step) {
                d.first_step = i;
            }
        }
    }
    d.hamming_fraction = run.empty() ? 0.0 : static_cast<double>(diff) / static_cast<double>(run.size());
    return d;
}

std::pair<double, std::size_t> coinciding_logit_deviation(const GenerationRun& run, const GenerationRun& reference) {
    double dev = 0.0;
    std::size_t steps = 0;
    const std::size_t n = std::min({run.logits.size(), reference.logits.size(), run.trace.size()});
    for (std::size_t k = 0; k < n; ++k) {
        // Step k was produced after feeding generated tokens [0, k).
        if (k > 0 && run.tokens[k - 1] != reference.tokens[k - 1]) {
            break;
        }
        if (run.trace[k].context_min != reference.trace[k].context_min) {
            continue;
        }
        ++steps;
        for (std::size_t i = 0; i < run.logits[k].size(); ++i) {
            dev = std::max(dev, std::abs(run.logits[k][i] - reference.logits[k][i]));
        }
    }
    return {dev, steps};
}

PolicyRow summarize(const std::string& name, const GenerationRun& run, const GenerationRun& reference) {
    PolicyRow r;
    r.name = name;
    r.policy = run.policy;
    r.seed = run.seed;
    double sum_ctx = 0.0;
    for (const DecodeTrace& t : run.trace) {
        r.peak_context = std::max(r.peak_context, t.context_max);
        r.peak_bytes = std::max(r.peak_bytes, t.accounted_bytes);
        sum_ctx += t.context_mean;
    }
    r.mean_context = run.trace.empty() ? 0.0 : sum_ctx / static_cast<double>(run.trace.size());

    std::size_t ref_ctx = 0;
    std::uint64_t ref_bytes = 0;
    for (const DecodeTrace& t : reference.trace) {
        ref_ctx = std::max(ref_ctx, t.context_max);
        ref_bytes = std::max(ref_bytes, t.accounted_bytes);
    }
    r.context_reduction = ref_ctx ? 1.0 - static_cast<double>(r.peak_context) / static_cast<double>(ref_ctx) : 0.0;
    r.memory_reduction = ref_bytes ? 1.0 - static_cast<double>(r.peak_bytes) / static_cast<double>(ref_bytes) : 0.0;
    r.divergence = token_divergence(run.tokens, reference.tokens);
    std::tie(r.logit_max_abs_dev, r.coinciding_steps) = coinciding_logit_deviation(run, reference);
    return r;
}

void to_json(nlohmann::json& j, const PolicyRow& r) {
    j = nlohmann::json{{"name", r.name},
                       {"policy", r.policy},
                       {"seed", r.seed},
                       {"peak_context", r.peak_context},
                       {"mean_context", r.mean_context},
                       {"peak_accounted_bytes", r.peak_bytes},
                       {"context_reduction", r.context_reduction},
                       {"memory_reduction", r.memory_reduction},
                       {"context_change", format_percent(-r.context_reduction)},
                       {"memory_change", format_percent(-r.memory_reduction)},
                       {"first_divergence_step",
                        r.divergence.first_step ? nlohmann::json(*r.divergence.first_step) : nullptr},
                       {"hamming_fraction", r.divergence.hamming_fraction},
                       {"logit_max_abs_dev", r.logit_max_abs_dev},
                       {"coinciding_steps", r.coinciding_steps}};
}

nlohmann::json report_to_json(const ComparisonReport& r, const ExperimentSpec& spec) {
    return nlohmann::json{{"format", "adsa-summary"},
                          {"version", 1},
                          {"spec", spec},
                          {"reference", r.reference_name},
                          {"rows", r.rows}};
}

std::string steps_csv_header() {
    return "policy,seed,step,position,token,context_min,context_mean,context_max,occupancy,accounted_bytes,"
           "evicted_position,evictions";
}

std::string steps_csv_row(const std::string& policy_name, const GenerationRun& run, const DecodeTrace& t) {
    std::ostringstream os;
    os << policy_name << ',' << run.seed << ',' << t.step << ',' << t.position << ',' << t.token << ','
       << t.context_min << ',' << fmt_double(t.context_mean) << ',' << t.context_max << ',' << t.occupancy << ','
       << t.accounted_bytes << ',';
    if (t.evicted_position) {
        os << *t.evicted_position;
    }
    os << ',' << t.evictions;
    return os.str();
}

ComparisonReport run_compare(const ExperimentSpec& spec, bool write) {
    spec.validate();
    const Model model = build_model(spec);
    const Grid grid = resolve_grid(spec);
    const GridRuns gr = execute_grid(model, spec, grid, spec.capture_weights);
    ComparisonReport rep = build_report(gr);

    if (write) {
        const auto steps_path = spec.out_dir / "steps.csv";
        write_file(steps_path, steps_csv(gr));
        rep.outputs.push_back(steps_path);
        if (spec.capture_weights) {
            std::vector<std::pair<std::string, LocalityHistogram>> hists;
            for (std::size_t p = 0; p < grid.policies.size(); ++p) {
                hists.emplace_back(grid.policies[p].name, locality_report(gr.runs.front()[p], spec.row_width));
            }
            const auto hist_path = spec.out_dir / "histogram.csv";
            write_file(hist_path, histogram_csv(hists));
            rep.outputs.push_back(hist_path);
        }
        const auto summary_path = spec.out_dir / "summary.json";
        write_file(summary_path, report_to_json(rep, spec).dump(2) + "\n");
        rep.outputs.push_back(summary_path);
    }
    return rep;
}

bool diverges_more(const PolicyRow& a, const PolicyRow& b) {
    const std::size_t inf = static_cast<std::size_t>(-1);
    const std::size_t fa = a.divergence.first_step.value_or(inf);
    const std::size_t fb = b.divergence.first_step.value_or(inf);
    if (fa != fb) {
        return fa < fb;
    }
    if (a.divergence.hamming_fraction != b.divergence.hamming_fraction) {
        return a.divergence.hamming_fraction > b.divergence.hamming_fraction;
    }
    return a.logit_max_abs_dev > b.logit_max_abs_dev;
}

AblationReport run_ablation(const ExperimentSpec& spec, bool write) {
    spec.validate();
    const auto base = std::find_if(spec.policies.begin(), spec.policies.end(),
                                   [](const NamedPolicy& p) { return p.policy.variant == Variant::adsa; });
    if (base == spec.policies.end()) {
        throw std::invalid_argument("ablate: the policy grid has no adsa policy");
    }

    AblationReport rep;
    rep.base_name = base->name;
    ExperimentSpec ablated = spec;
    ablated.policies.clear();
    auto add = [&](const std::string& suffix, std::size_t n, std::size_t m, std::size_t k) {
        CachePolicy p = base->policy;
        p.n_prefix = n;
        p.m_local = m;
        p.k_select = k;
        ablated.policies.push_back({base->name + suffix, p});
    };
    const CachePolicy& bp = base->policy;
    add("", bp.n_prefix, bp.m_local, bp.k_select);
    add("/prefix_off", 0, bp.m_local, bp.k_select);
    add("/select_off", bp.n_prefix, bp.m_local, 0);
    add("/local_off", bp.n_prefix, 0, bp.k_select);
    for (const NamedPolicy& p : ablated.policies) {
        p.policy.validate();
    }

    const Model model = build_model(ablated);
    const Grid grid = resolve_grid(ablated);
    const GridRuns gr = execute_grid(model, ablated, grid, false);
    rep.comparison = build_report(gr);

    // rows are policy-major: variant v, seed s at v * n_seeds + s
    const std::size_t n_seeds = spec.seeds.size();
    for (std::size_t s = 0; s < n_seeds; ++s) {
        std::size_t best = 1;
        for (std::size_t v = 2; v <= 3; ++v) {
            if (diverges_more(rep.comparison.rows[v * n_seeds + s], rep.comparison.rows[best * n_seeds + s])) {
                best = v;
            }
        }
        rep.largest_removal.push_back(grid.policies[best].name);
    }

    if (write) {
        const auto steps_path = spec.out_dir / "steps.csv";
        write_file(steps_path, steps_csv(gr));
        rep.comparison.outputs.push_back(steps_path);
        nlohmann::json summary = report_to_json(rep.comparison, ablated);
        summary["format"] = "adsa-ablation";
        summary["base"] = rep.base_name;
        summary["largest_removal_per_seed"] = rep.largest_removal;
        const auto summary_path = spec.out_dir / "summary.json";
        write_file(summary_path, summary.dump(2) + "\n");
        rep.comparison.outputs.push_back(summary_path);
    }
    return rep;
}

LocalityHistogram locality_report(std::span<const WeightRecord> records, std::size_t row_width) {
    if (records.empty()) {
        throw std::invalid_argument("locality_report: no captured attention weights (run with capture on)");
    }
    if (row_width == 0) {
        throw std::invalid_argument("locality_report: row_width must be positive");
    }
    LocalityHistogram h;
    h.row_width = row_width;
    h.records = records.size();
    for (const WeightRecord& r : records) {
        if (r.weights.size() != r.used_positions.size()) {
            throw std::invalid_argument("locality_report: weights/positions length mismatch");
        }
        for (std::size_t i = 0; i < r.weights.size(); ++i) {
            const std::uint64_t dist = r.q_position - r.used_positions[i];
            if (dist >= h.distance_mass.size()) {
                h.distance_mass.resize(dist + 1, 0.0);
            }
            h.distance_mass[dist] += r.weights[i];
            if (dist > 0 && dist % row_width == 0) {
                const std::size_t rows_back = dist / row_width;
                if (rows_back >= h.column_mass.size()) {
                    h.column_mass.resize(rows_back + 1, 0.0);
                }
                h.column_mass[rows_back] += r.weights[i];
            }
        }
    }
    const double n = static_cast<double>(records.size());
    for (double& m : h.distance_mass) {
        m /= n;
    }
    for (double& m : h.column_mass) {
        m /= n;
    }
    return h;
}

LocalityHistogram locality_report(const GenerationRun& run, std::size_t row_width) {
    return locality_report(run.weights, row_width);
}

std::string histogram_csv(const std::vector<std::pair<std::string, LocalityHistogram>>& hists) {
    std::ostringstream os;
    os << kHistogramCsvVersion << '\n' << "policy,kind,bucket,mass\n";
    for (const auto& [name, h] : hists) {
        for (std::size_t d = 0; d < h.distance_mass.size(); ++d) {
            os << name << ",distance," << d << ',' << fmt_double(h.distance_mass[d]) << '\n';
        }
        for (std::size_t r = 1; r < h.column_mass.size(); ++r) {
            os << name << ",same_column," << r << ',' << fmt_double(h.column_mass[r]) << '\n';
        }
    }
    return os.str();
}

std::vector<std::pair<std::string, LocalityHistogram>> run_locality(const ExperimentSpec& spec, bool write) {
    spec.validate();
    ExperimentSpec one = spec;
    one.seeds = {spec.seeds.front()};
    const Model model = build_model(one);
    const Grid grid = resolve_grid(one);
    const GridRuns gr = execute_grid(model, one, grid, true);

    std::vector<std::pair<std::string, LocalityHistogram>> hists;
    for (std::size_t p = 0; p < grid.policies.size(); ++p) {
        hists.emplace_back(grid.policies[p].name, locality_report(gr.runs.front()[p], spec.row_width));
    }
    if (write) {
        write_file(spec.out_dir / "histogram.csv", histogram_csv(hists));
        nlohmann::json summary{{"format", "adsa-locality"}, {"version", 1}, {"spec", spec}};
        nlohmann::json per = nlohmann::json::array();
        for (const auto& [name, h] : hists) {
            double column_total = 0.0;
            for (double m : h.column_mass) {
                column_total += m;
            }
            per.push_back({{"policy", name},
                           {"records", h.records},
                           {"self_mass", h.distance_mass.empty() ? 0.0 : h.distance_mass[0]},
                           {"same_column_mass", column_total}});
        }
        summary["policies"] = per;
        write_file(spec.out_dir / "summary.json", summary.dump(2) + "\n");
    }
    return hists;
}

std::size_t peak_occupancy(const ExperimentSpec& spec, const CachePolicy& policy) {
    return std::min(policy.capacity, spec.max_context());
}

std::uint64_t crossover_batch(std::uint64_t per_sequence_bytes, std::uint64_t model_bytes) {
    if (per_sequence_bytes == 0) {
        throw std::invalid_argument("crossover_batch: per-sequence cache bytes must be positive");
    }
    return model_bytes / per_sequence_bytes + 1;
}

MemoryReport memory_report(const ExperimentSpec& spec, bool write) {
    spec.validate();
    const Model model = build_model(spec);
    const Grid grid = resolve_grid(spec);
    const FootprintModel fm = spec.model.footprint();
    const std::uint64_t model_bytes =
        static_cast<std::uint64_t>(model.parameter_count()) * spec.model.bytes_per_scalar;

    MemoryReport rep;
    for (const NamedPolicy& np : grid.policies) {
        const std::uint64_t per_seq = memory_footprint(peak_occupancy(spec, np.policy), fm);
        for (std::size_t b : spec.batch_sizes) {
            rep.points.push_back({np.name, b, per_seq * b, model_bytes});
        }
        rep.crossover.emplace_back(np.name, crossover_batch(per_seq, model_bytes));
    }

    if (write) {
        std::ostringstream os;
        os << kMemoryCsvVersion << '\n' << "policy,batch,cache_bytes,model_bytes,total_bytes\n";
        for (const MemoryPoint& p : rep.points) {
            os << p.policy << ',' << p.batch << ',' << p.cache_bytes << ',' << p.model_bytes << ','
               << p.total_bytes() << '\n';
        }
        const auto csv_path = spec.out_dir / "memory.csv";
        write_file(csv_path, os.str());
        nlohmann::json cross = nlohmann::json::array();
        for (const auto& [name, b] : rep.crossover) {
            cross.push_back({{"policy", name}, {"crossover_batch", b}});
        }
        const auto summary_path = spec.out_dir / "summary.json";
        write_file(summary_path, nlohmann::json{{"format", "adsa-memory"},
                                                {"version", 1},
                                                {"spec", spec},
                                                {"model_bytes", model_bytes},
                                                {"crossover", cross}}
                                         .dump(2) +
                                     "\n");
        rep.outputs = {csv_path, summary_path};
    }
    return rep;
}

std::string format_percent(double fraction, int decimals) {
    double v = fraction * 100.0;
    if (v == 0.0) {
        v = 0.0;  // drop the sign of -0
    }
    std::string s = fmt_fixed(v, decimals);
    if (s.find_first_not_of("-0.") == std::string::npos) {
        s.erase(0, s[0] == '-' ? 1 : 0);
    }
    return s + "%";
}

}  // namespace adsa::harness
