// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "tsgan/cgan.hpp"

namespace tsgan {

// Checkpoint container layout:
//
//   magic    8 bytes  "TSGANCKP"
//   version  u32 LE
//   hdr_len  u64 LE
//   header   hdr_len bytes of UTF-8 JSON: config, scaler (decimal strings,
//            17 significant digits), epoch, optimizer step counts, RNG state
//            and the ordered block directory [{name, rows, cols}]
//   blocks   for each directory entry, rows*cols IEEE-754 doubles, LE,
//            column-major
//
// Blocks cover both networks, both optimizers' moments ("adam_g.m.<param>",
// ...) and the loss history ("history.epoch_d", ...).
inline constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::json config_to_json(const TrainConfig& config);
/// Overlays any fields present in `j` onto `base`. Unknown keys are ignored.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base = {});

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Throws DataError on a bad magic, version mismatch, or truncated/inconsistent
// block data.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tsgan
