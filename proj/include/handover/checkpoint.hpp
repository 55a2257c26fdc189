#pragma once

#include "handover/net.hpp"

#include <filesystem>

namespace handover {

/// Checkpoint container: model tensors plus the seed that produced them.
struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
};

inline constexpr int kCheckpointFormatVersion = 1;

/// File layout: one JSON header line
///   {"format_version":1,"feature_dim":F,"embedding_dim":D,"hidden_dim":H,"seed":S}
/// terminated by '\n', followed by a flat little-endian float32 payload.
/// Tensors appear row-major in the fixed order proj_w, proj_b, lstm_w_in,
/// lstm_w_rec, lstm_b, det_w, det_b, dir_w, dir_b.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace handover
