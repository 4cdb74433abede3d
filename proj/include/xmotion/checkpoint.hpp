#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xmotion/tensor.hpp"

namespace xmotion {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Checkpoint file: a plain-text manifest (one `param <name> <rank> <extents...>
// <byte offset>` line per tensor, offsets relative to the start of the data
// section) followed by the raw little-endian float64 blobs in manifest order.
// Writes go to a temp file first and are renamed into place on success.
void save_checkpoint(const std::string& path, const NamedTensors& params);
NamedTensors load_checkpoint(const std::string& path);

}  // namespace xmotion
