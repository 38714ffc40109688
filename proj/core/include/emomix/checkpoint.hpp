#pragma once

#include <string>
#include <utility>
#include <vector>

#include "emomix/tensor.hpp"

namespace emomix {

// Binary checkpoint: 8-byte magic, u32 version, u32 tensor count, then per
// tensor: u32 name length, name bytes, u32 rank, u64 dims, raw little-endian
// doubles. Round trips bit-exactly.
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& tensors);

std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path);

}  // namespace emomix
