#pragma once

#include <memory>
#include <string>

#include "loadcast/deep.hpp"

namespace loadcast {

// Versioned text checkpoint: header, preset identity, then one row per named
// parameter tensor with full-precision values.
void save_checkpoint(const std::string& path, const DeepModel& model);

std::unique_ptr<DeepModel> load_checkpoint(const std::string& path);

}  // namespace loadcast
