#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glomseg/tensor.hpp"

namespace glomseg {

// Checkpoint format: one flat little-endian float32 binary file plus a JSON
// manifest listing, per parameter, {name, shape, byte_offset, byte_length};
// the manifest also records epoch, iteration and the RNG state seed. Files are
// written atomically (temp + rename) and round-trip bit-exactly.
struct Checkpoint {
  int epoch = 0;
  std::int64_t iteration = 0;
  std::uint64_t rng_seed = 0;
  std::vector<std::pair<std::string, Tensor>> params;
};

void save_checkpoint(const std::string& manifest_path,
                     const std::vector<std::pair<std::string, Tensor>>& params, int epoch,
                     std::int64_t iteration, std::uint64_t rng_seed);

Checkpoint load_checkpoint(const std::string& manifest_path);

// Copy values from a loaded checkpoint into an existing named-parameter list;
// every destination name must be present with a matching shape.
void load_params_into(const Checkpoint& ckpt,
                      const std::vector<std::pair<std::string, Tensor>>& dst);

// runs/train/ckpt_epoch_007.json -> 7; throws if the name does not match the
// ckpt_epoch_NNN pattern.
int epoch_from_checkpoint_name(const std::string& manifest_path);
std::string checkpoint_manifest_name(int epoch);

}  // namespace glomseg
