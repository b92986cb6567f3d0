#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "sylvinit/nnet.hpp"

namespace sylvinit {

/// {"input_dims": [h, w, c], "num_classes": k, "layers": [{"type": "conv2d", "name": ..., "out_channels": ...,
///  "kernel": [f_h, f_w], "stride": s, "pad": p}, {"type": "relu"}, {"type": "dense", "units": d}, ...]}
NetworkSpec network_spec_from_json(const nlohmann::json& doc);
nlohmann::json network_spec_to_json(const NetworkSpec& spec);
NetworkSpec load_network_spec(const std::filesystem::path& file);
void save_network_spec(const std::filesystem::path& file, const NetworkSpec& spec);

inline constexpr char kParamMagic[4] = {'S', 'Y', 'L', 'V'};
inline constexpr std::uint32_t kParamVersion = 1;

/// Binary parameter file: "SYLV", version u32, trainable layer count u32, then
/// for every trainable layer a weight record followed by a bias record. A record
/// is name length u32, name bytes, dims count u32, dims u32..., little-endian f64
/// values. Conv weights are written as (c_o, c_i, f_h, f_w); dense as (d_o, d_i).
void write_parameters(std::ostream& out, const Network& net);
void save_parameters(const std::filesystem::path& file, const Network& net);

/// Reads parameters into a network built from `spec`; shapes and names must match.
Network read_parameters(std::istream& in, const NetworkSpec& spec);
Network load_parameters(const std::filesystem::path& file, const NetworkSpec& spec);

}  // namespace sylvinit
