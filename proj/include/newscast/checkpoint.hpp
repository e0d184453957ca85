#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "newscast/dataset.hpp"
#include "newscast/models.hpp"

namespace newscast {

/// Best-on-validation snapshot of a training run.
struct Checkpoint {
    ModelParams params;
    std::size_t epoch = 0;  // 1-based; 0 means "initial parameters"
    double validation_loss = 0.0;
    std::map<std::string, MinMaxScaler> scalers;
    std::uint64_t seed = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian binary archive; the byte layout is documented in
/// docs/checkpoint_format.md.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Atomic write (temp file + rename).
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace newscast
