#pragma once

#include <cstdint>
#include <string>

#include "wsg/config.hpp"
#include "wsg/model.hpp"

namespace wsg::ckpt {

// On-disk snapshot of a training run: iteration counter, the config it
// was launched with, and every parameter tensor with its optimizer
// state, in parameter-store order. The format is a fixed-layout binary
// stream (little-endian integers, raw IEEE-754 doubles), so a
// save -> load -> save cycle is byte-identical.
inline constexpr char kMagic[8] = {'W', 'S', 'G', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kFormatVersion = 1;

void save_checkpoint(const std::string& path, const model::Model& m, std::uint64_t iteration);

struct LoadedCheckpoint {
  model::Model model;
  std::uint64_t iteration = 0;
  std::string config_text;  // exactly as stored at save time
};

// Rebuilds the model from the stored config snapshot and restores every
// parameter (values and momentum) bitwise. Corrupt files, unknown
// format versions, and parameter mismatches all fail loudly.
LoadedCheckpoint load_checkpoint(const std::string& path);

// Resume precedence: the snapshot stored in the checkpoint wins over a
// possibly edited config file. Returns a warning naming the first
// differing field, or an empty string when the two agree.
std::string snapshot_override_warning(const RunConfig& snapshot, const RunConfig& file_config);

// FNV-1a over every parameter's name, shape, values, and momentum.
// Cheap fingerprint for determinism and hermeticity assertions.
std::uint64_t param_hash(const model::Model& m);

}  // namespace wsg::ckpt
