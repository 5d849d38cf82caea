// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

// adsa: experiment driver.
//
//   adsa compare  [--config spec.json] [--out dir] [--policy name=n,m,K,C]...
//   adsa ablate   ...
//   adsa locality ...
//   adsa memory   ...
//
// On success prints {"status":"ok",...} to stdout and exits 0. On failure
// prints {"status":"error","error":{"kind":...,"message":...}} and exits
// nonzero (2 for usage errors, 1 otherwise).

#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adsa/harness.hpp"
#include "adsa/kernels.hpp"
#include "json.hpp"

namespace {

using adsa::harness::ExperimentSpec;

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> length;
    std::string weights;
    bool capture = false;
    bool shared = false;
    bool serial = false;
    std::vector<std::string> policies;
};

// Built-in grid used when no --config is given: small enough to run in a
// couple of seconds, large enough that eviction and selection both engage.
ExperimentSpec default_spec() {
    ExperimentSpec s;
    s.model.vocab_size = 64;
    s.model.d_model = 32;
    s.model.n_heads = 2;
    s.model.n_layers = 2;
    s.model.seq_capacity = 576;
    s.length = 576;
    s.prompt = {0};
    s.policies = {
        {"dense", adsa::CachePolicy{0, 1, 0, 576, adsa::Variant::dense}},
        {"window", adsa::CachePolicy{0, 256, 0, 256, adsa::Variant::window}},
        {"window_prefix", adsa::CachePolicy{32, 224, 0, 256, adsa::Variant::window_prefix}},
        {"adsa-384", adsa::CachePolicy{32, 160, 192, 384, adsa::Variant::adsa}},
        {"adsa-256", adsa::CachePolicy{32, 160, 64, 256, adsa::Variant::adsa}},
    };
    return s;
}

ExperimentSpec resolve(const Flags& f) {
    ExperimentSpec spec = f.config.empty() ? default_spec() : adsa::harness::load_spec(f.config);
    if (!f.policies.empty()) {
        spec.policies.clear();
        for (const std::string& p : f.policies) {
            spec.policies.push_back(adsa::harness::parse_policy_flag(p));
        }
    }
    if (!f.out.empty()) {
        spec.out_dir = f.out;
    }
    if (f.seed) {
        spec.model.seed = *f.seed;
    }
    if (f.length) {
        spec.length = *f.length;
    }
    if (!f.weights.empty()) {
        spec.weights_path = f.weights;
    }
    spec.capture_weights = spec.capture_weights || f.capture;
    spec.shared_selection = spec.shared_selection || f.shared;
    return spec;
}

nlohmann::json paths_json(const std::vector<std::filesystem::path>& paths) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : paths) {
        out.push_back(p.string());
    }
    return out;
}

int emit_error(const std::string& kind, const std::string& message, int code) {
    std::cout << nlohmann::json{{"status", "error"}, {"error", {{"kind", kind}, {"message", message}}}}.dump()
              << std::endl;
    return code;
}

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON experiment spec");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--seed", f.seed, "Model weight seed (overrides the spec)");
    sub->add_option("--length", f.length, "Tokens to generate (overrides the spec)");
    sub->add_option("--weights", f.weights, "Load model weights from this file");
    sub->add_flag("--capture-weights", f.capture, "Record attention weights (writes histogram.csv)");
    sub->add_flag("--shared-selection", f.shared, "Share eviction/selection across the heads of a layer");
    sub->add_flag("--serial", f.serial, "Disable the OpenMP kernels");
    sub->add_option("--policy", f.policies, "Policy <name>=<n,m,K,C>; repeatable, replaces the spec's grid")
        ->take_all();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive dynamic sparse attention experiments"};
    app.require_subcommand(1);
    Flags flags;

    auto* compare = app.add_subcommand("compare", "Compare attention policies against dense decoding");
    auto* ablate = app.add_subcommand("ablate", "Prefix/select/local ablation of the first adsa policy");
    auto* locality = app.add_subcommand("locality", "Attention-distance histograms (captures weights)");
    auto* memory = app.add_subcommand("memory", "Accounted memory versus batch size");
    for (auto* sub : {compare, ablate, locality, memory}) {
        add_common(sub, flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error("usage", e.what(), 2);
    }

    try {
        if (flags.serial) {
            adsa::kernels::set_parallel(false);
        }
        const ExperimentSpec spec = resolve(flags);
        nlohmann::json ok{{"status", "ok"}};
        if (compare->parsed()) {
            const auto rep = adsa::harness::run_compare(spec);
            ok["command"] = "compare";
            ok["outputs"] = paths_json(rep.outputs);
        } else if (ablate->parsed()) {
            const auto rep = adsa::harness::run_ablation(spec);
            ok["command"] = "ablate";
            ok["largest_removal_per_seed"] = rep.largest_removal;
            ok["outputs"] = paths_json(rep.comparison.outputs);
        } else if (locality->parsed()) {
            adsa::harness::run_locality(spec);
            ok["command"] = "locality";
            ok["outputs"] = paths_json({spec.out_dir / "histogram.csv", spec.out_dir / "summary.json"});
        } else if (memory->parsed()) {
            const auto rep = adsa::harness::memory_report(spec);
            ok["command"] = "memory";
            ok["outputs"] = paths_json(rep.outputs);
        }
        std::cout << ok.dump() << std::endl;
        return 0;
    } catch (const std::invalid_argument& e) {
        return emit_error("invalid_argument", e.what(), 2);
    } catch (const std::exception& e) {
        return emit_error("runtime", e.what(), 1);
    }
}
