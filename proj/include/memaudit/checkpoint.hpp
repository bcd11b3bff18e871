// Copyright 2026 The MemAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// TinyNet checkpoints: "MATNCKPT", uint32 format version, uint32 length and
// bytes of the config as JSON, uint64 parameter count, then the parameters
// as little-endian float32.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "memaudit/error.hpp"
#include "memaudit/tinynet.hpp"

namespace memaudit {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'M', 'A', 'T', 'N', 'C', 'K', 'P', 'T'};

inline nlohmann::json config_to_json(const TinyNetConfig& c) {
  nlohmann::json convs = nlohmann::json::array();
  for (const auto& s : c.convs) {
    convs.push_back({{"out_channels", s.out_channels}, {"kernel", s.kernel}, {"stride", s.stride}, {"padding", s.padding}});
  }
  return {{"variant", std::string(to_string(c.variant))},
          {"convs", convs},
          {"fc_widths", c.fc_widths},
          {"input_shape", {c.input_shape.channels, c.input_shape.height, c.input_shape.width}},
          {"output_dim", c.output_dim},
          {"seed", c.seed},
          {"input_mean", c.input_mean},
          {"input_std", c.input_std}};
}

inline TinyNetConfig config_from_json(const nlohmann::json& j) {
  try {
    TinyNetConfig c;
    c.variant = parse_variant(j.at("variant").get<std::string>());
    for (const auto& s : j.at("convs")) {
      c.convs.push_back({s.at("out_channels").get<int>(), s.at("kernel").get<int>(), s.at("stride").get<int>(),
                         s.at("padding").get<int>()});
    }
    c.fc_widths = j.at("fc_widths").get<std::vector<int>>();
    const auto shape = j.at("input_shape").get<std::vector<int>>();
    if (shape.size() != 3) throw InputError("input_shape needs three entries");
    c.input_shape = {shape[0], shape[1], shape[2]};
    c.output_dim = j.at("output_dim").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.input_mean = j.at("input_mean").get<float>();
    c.input_std = j.at("input_std").get<float>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad model config: ") + e.what());
  }
}

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw InputError("truncated checkpoint");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

inline std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  return lo | static_cast<std::uint64_t>(get_u32(in)) << 32;
}

}  // namespace detail

inline void save_checkpoint(const TinyNet<float>& model, std::ostream& out) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put_u32(out, kCheckpointVersion);
  const std::string config = config_to_json(model.config()).dump();
  detail::put_u32(out, static_cast<std::uint32_t>(config.size()));
  out.write(config.data(), static_cast<std::streamsize>(config.size()));
  const auto params = model.params();
  detail::put_u64(out, params.size());
  for (float v : params) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  if (!out) throw Error("failed to write checkpoint");
}

inline void save_checkpoint(const TinyNet<float>& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save_checkpoint(model, out);
}

inline TinyNet<float> load_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw InputError("not a checkpoint file");
  }
  const std::uint32_t version = detail::get_u32(in);
  if (version != kCheckpointVersion) throw InputError("unsupported checkpoint version " + std::to_string(version));
  std::string config(detail::get_u32(in), '\0');
  if (!in.read(config.data(), static_cast<std::streamsize>(config.size()))) throw InputError("truncated checkpoint");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad checkpoint config: ") + e.what());
  }
  TinyNet<float> model(config_from_json(j));
  const std::uint64_t count = detail::get_u64(in);
  if (count != model.param_count()) throw InputError("checkpoint parameter count does not match its config");
  for (auto& v : model.params()) v = std::bit_cast<float>(detail::get_u32(in));
  return model;
}

inline TinyNet<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace memaudit
