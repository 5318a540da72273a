#pragma once

// Binary checkpoint container for ModelParams. Layout (all integers little endian):
//
//   magic      8 bytes  "SATNCKPT"
//   version    u32      1
//   dim        u32
//   layers     u32
//   max_pos    u32
//   seed       u64
//   sections   u32      number of tensor sections
//   per section:
//     name_len u32, name bytes (ASCII, no terminator)
//     rows u32, cols u32
//     rows*cols IEEE-754 binary64 values, little endian, row-major
//   checksum   u64      FNV-1a over every preceding byte
//
// Sections appear in ModelParams::blocks() order. Loading validates magic, version,
// checksum, section names and shapes; any mismatch raises CheckpointError.

#include <cstdint>
#include <filesystem>
#include <string>

#include "saturn/gnn.hpp"

namespace saturn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const ModelParams& params);
ModelParams deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace saturn
