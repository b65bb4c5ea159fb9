#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srres/model.hpp"

namespace srres {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Canonical little-endian layout:
///
///   "SRCK" | u32 version | u32 tensor count
///   per tensor: u16 name length | UTF-8 name | u8 dtype (0 = f32) | u8 rank
///               | rank x u64 dims | payload
///
/// Tensors appear in SrModel::state() order, so equal models encode to
/// equal bytes.
std::vector<std::uint8_t> encode_checkpoint(const SrModel<float>& m);
/// Throws CheckpointError on bad magic, version, names or sizes.
SrModel<float> decode_checkpoint(std::span<const std::uint8_t> bytes, const ModelConfig& config);

/// JSON sidecar contents. `epoch` is optional training progress (-1 = none).
std::string config_to_json(const ModelConfig& config, int epoch = -1);
ModelConfig config_from_json(const std::string& text);

/// Writes `path` and its sidecar `path + ".json"`.
void save_checkpoint(const std::string& path, const SrModel<float>& m, int epoch = -1);
SrModel<float> load_checkpoint(const std::string& path);
int checkpoint_epoch(const std::string& path);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace srres
