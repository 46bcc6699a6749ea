#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>

#include "simpdom/tagger.hpp"

namespace simpdom {

inline constexpr int kCheckpointVersion = 1;

// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

// Layout: a header line "SIMPDOM-CKPT <version> <manifest bytes>", the JSON
// manifest (config, attributes, vocab file name, tensor records) and a raw
// little-endian f32 data section. The vocabulary is written next to the
// checkpoint as "<file name>.vocab.json".
void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);

// Throws CorruptionError when the manifest and data section disagree or a
// tensor checksum fails, IoError when a file cannot be read.
TrainedModel load_checkpoint(const std::filesystem::path& path);

std::filesystem::path vocab_path_for(const std::filesystem::path& checkpoint);

}  // namespace simpdom
