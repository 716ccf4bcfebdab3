#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfp/model/model.hpp"

namespace cfp::model {

// Binary checkpoint, little-endian throughout:
//
//   "CFPT"                      4 bytes magic
//   u32 version                 currently 1
//   u64 length, bytes           UTF-8 config text (sorted key=value lines)
//   u64 config_hash             FNV-1a 64 of the config text
//   u64 step                    optimizer steps taken
//   u64 count                   number of tensors that follow
//   per tensor:
//     u32 length, bytes         name
//     u32 rank, u64 dims[rank]
//     f64 payload[prod(dims)]
//
// Tensors appear in Model registration order, followed by optimizer state
// ("adam.m.<param>", "adam.v.<param>") when present.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct Checkpoint {
  std::string config_text;
  std::uint64_t config_hash = 0;
  std::uint64_t step = 0;
  std::vector<NamedTensor> tensors;

  [[nodiscard]] const Tensor* find(const std::string& name) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin = "<checkpoint>");
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// Model parameters (in order) appended to a checkpoint.
void append_model(Checkpoint& ckpt, const Model& model);
// Builds the model described by the checkpoint's config and fills every
// parameter, validating names and shapes (FormatError on mismatch).
Model load_model(const Checkpoint& ckpt);

}  // namespace cfp::model
