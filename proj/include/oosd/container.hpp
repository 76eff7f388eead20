/*
 * Copyright 2026 The oosd Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef OOSD_CONTAINER_HPP_
#define OOSD_CONTAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "oosd/pipeline.hpp"

namespace oosd {

inline constexpr std::uint32_t kContainerVersion = 1;
// Byte offset of the 8-byte build timestamp; everything else is a pure
// function of the training inputs.
inline constexpr std::size_t kTimestampOffset = 12;

struct Provenance {
  std::string config_json;
  std::string config_digest;
  std::int64_t build_timestamp = 0;
};

// Layout, little-endian:
//   "OOSDMDL\0" | u32 version | i64 timestamp | sections ... | u64 checksum
// The checksum is FNV-1a over every byte except the timestamp.
std::string serialize_detector(const OosDetector& detector, const Provenance& provenance);

struct LoadedDetector {
  OosDetector detector;
  Provenance provenance;
};

// Throws VersionMismatch for other versions, MalformedFile otherwise.
LoadedDetector deserialize_detector(std::string_view bytes);

void save_detector(const std::filesystem::path& path, const OosDetector& detector,
                   const Provenance& provenance);
LoadedDetector load_detector(const std::filesystem::path& path);

std::string config_digest(std::string_view config_json);

}  // namespace oosd

#endif  // OOSD_CONTAINER_HPP_
