// Copyright (C) 2026 The ADSA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>

#include "adsa/model.hpp"

namespace adsa {

// Weight file layout (all integers little-endian):
//
//   offset 0   8 bytes   magic "ADSAWGT1"
//   offset 8   u64       header length H
//   offset 16  H bytes   UTF-8 JSON header:
//                          {"format":"adsa-weights","version":1,"dtype":"f64le",
//                           "config":{...ModelConfig...},
//                           "tensors":[{"name":..., "shape":[...]}, ...]}
//   then every tensor in header order, row-major IEEE-754 binary64 LE.
//
// Tensor order is tensor_layout(config).

void save_weights(std::ostream& os, const Model& model);
void save_weights(const std::filesystem::path& path, const Model& model);

/// Throws std::runtime_error on a malformed or truncated file.
Model load_weights(std::istream& is);
Model load_weights(const std::filesystem::path& path);

}  // namespace adsa
