#pragma once

#include <string>

#include <json.hpp>

#include "near/netdef.hpp"

namespace near {

// Stable JSON encoding of a model spec. Document shape:
//
// {
//   "layers": [
//     {"type": "dense", "in": 784, "out": 200, "bias": true},
//     {"type": "conv2d", "in_channels": 3, "out_channels": 8,
//      "kernel": 3, "stride": 1, "padding": 0, "bias": true},
//     {"type": "flatten"}
//   ],
//   "activation": "silu",
//   "final_activation": "identity",
//   "init": {"scheme": "xavier_uniform"},
//   "seed": 7
// }
//
// A custom init carries "bounds": [[lo, hi], ...], one pair per weighted
// layer.
nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

ModelSpec load_model_spec(const std::string& path);

// FNV-1a 64 hash of the compact JSON encoding, as 16 hex digits. Used to tie
// reports to the exact spec they were produced from.
std::string model_spec_digest(const ModelSpec& spec);

}  // namespace near
