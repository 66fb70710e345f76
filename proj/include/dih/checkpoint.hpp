#pragma once

#include <string>

#include "dih/train.hpp"

namespace dih {

// Checkpoint file layout (little-endian):
//   magic "DIH1"
//   u32 format version
//   u32 length + UTF-8 architecture description (JSON)
//   u64 training iteration counter
//   4 x u64 RNG state
//   parameter blobs as 32-bit floats in declaration order
//   running statistics blobs as 32-bit floats in declaration order
//   u32 CRC-32 of all preceding bytes
// save -> load -> save is byte-identical.

void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

} // namespace dih
