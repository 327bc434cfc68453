/*
 * Copyright 2026 The fltp-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Binary checkpoint format for ModelParams, all fields little-endian:
//
//   offset  size  field
//   0       4     magic "FLTP"
//   4       4     u32 hidden size H
//   8       4     u32 input dim (9)
//   12      4     u32 output dim (15)
//   16      8*n   f64 parameter values, n = flat_size(H)

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "fltp/errors.hpp"
#include "fltp/lstm.hpp"

namespace fltp {

inline constexpr std::array<char, 4> kCheckpointMagic = {'F', 'L', 'T', 'P'};

namespace detail {

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw std::runtime_error("truncated checkpoint");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const ModelParams& params) {
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.hidden()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kFeatureCount));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kOutputSize));
  for (double v : params.values()) detail::put_le<double>(out, v);
}

inline ModelParams read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic) {
    throw std::runtime_error("not a model checkpoint");
  }
  const auto hidden = detail::get_le<std::uint32_t>(in);
  const auto input_dim = detail::get_le<std::uint32_t>(in);
  const auto output_dim = detail::get_le<std::uint32_t>(in);
  if (hidden == 0 || input_dim != kFeatureCount || output_dim != kOutputSize) {
    throw std::runtime_error("checkpoint dimensions do not match this model");
  }
  std::vector<double> values(ModelParams::flat_size(hidden));
  for (double& v : values) v = detail::get_le<double>(in);
  return ModelParams::from_flat(hidden, std::move(values));
}

inline void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_checkpoint(out, params);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace fltp
