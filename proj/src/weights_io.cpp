// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#include "adsa/weights_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace adsa {

namespace {

constexpr std::array<char, 8> kMagic = {'A', 'D', 'S', 'A', 'W', 'G', 'T', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    os.write(b.data(), b.size());
}

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
        throw std::runtime_error("weight file truncated");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

}  // namespace

void save_weights(std::ostream& os, const Model& model) {
    const ModelConfig& c = model.config();
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& [name, shape] : tensor_layout(c)) {
        tensors.push_back({{"name", name}, {"shape", shape}});
    }
    const std::string header =
        nlohmann::json{{"format", "adsa-weights"}, {"version", 1}, {"dtype", "f64le"}, {"config", c}, {"tensors", tensors}}
            .dump();

    os.write(kMagic.data(), kMagic.size());
    put_u64(os, header.size());
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const Vec* t : tensor_list(model.weights())) {
        for (double x : *t) {
            put_u64(os, std::bit_cast<std::uint64_t>(x));
        }
    }
    if (!os) {
        throw std::runtime_error("failed writing weight file");
    }
}

void save_weights(const std::filesystem::path& path, const Model& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    save_weights(os, model);
}

Model load_weights(std::istream& is) {
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
        throw std::runtime_error("not an ADSA weight file (bad magic)");
    }
    const std::uint64_t header_len = get_u64(is);
    if (header_len > (1u << 26)) {
        throw std::runtime_error("weight file header is implausibly large");
    }
    std::string header(header_len, '\0');
    if (!is.read(header.data(), static_cast<std::streamsize>(header_len))) {
        throw std::runtime_error("weight file truncated in header");
    }
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("weight file header is not valid JSON: ") + e.what());
    }
    if (h.value("format", std::string{}) != "adsa-weights" || h.value("version", 0) != 1 ||
        h.value("dtype", std::string{}) != "f64le") {
        throw std::runtime_error("unsupported weight file format/version/dtype");
    }
    const ModelConfig config = h.at("config").get<ModelConfig>();
    config.validate();

    const auto layout = tensor_layout(config);
    const auto& listed = h.at("tensors");
    if (listed.size() != layout.size()) {
        throw std::runtime_error("weight file tensor list does not match config");
    }
    ModelWeights w;
    w.layers.resize(config.n_layers);
    auto slots = tensor_list(w);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& [name, shape] = layout[i];
        if (listed[i].at("name").get<std::string>() != name ||
            listed[i].at("shape").get<std::vector<std::size_t>>() != shape) {
            throw std::runtime_error("weight file tensor " + std::to_string(i) + " does not match expected '" + name +
                                     "'");
        }
        std::size_t n = 1;
        for (std::size_t s : shape) {
            n *= s;
        }
        slots[i]->resize(n);
        for (double& x : *slots[i]) {
            x = std::bit_cast<double>(get_u64(is));
        }
    }
    return Model(config, std::move(w));
}

Model load_weights(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return load_weights(is);
}

}  // namespace adsa
