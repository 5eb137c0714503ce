#pragma once

#include <string>
#include <vector>

#include "scriptqa/nn.hpp"

namespace scriptqa {

// Binary checkpoint: magic, version, a free-form JSON metadata string, then
// named float64 tensors in column-major order. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const std::string& meta_json,
                     const std::vector<Parameter*>& params);

// Loads tensors into the given parameters, matched by name; every parameter
// must be present with identical dimensions. Returns the metadata string.
std::string load_checkpoint(const std::string& path,
                            const std::vector<Parameter*>& params);

// Reads only the metadata string.
std::string read_checkpoint_meta(const std::string& path);

}  // namespace scriptqa
