#pragma once

#include <string>

#include "titan/nn/params.hpp"

namespace titan::nn {

// Binary checkpoint: magic, format version, a JSON header describing the
// model kind / config / parameter shapes, then raw little-endian doubles in
// store order.  load_checkpoint refuses a file whose kind or parameter
// shapes disagree with the given store and names the first mismatch.
//
// kind: short model tag ("action", "fol", "ego").
// config_json: serialized model configuration, stored verbatim and returned
// on load so callers can verify compatibility.

void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::string& config_json, const ParamStore& params);

std::string load_checkpoint(const std::string& path, const std::string& kind,
                            ParamStore& params);

// Header peek without loading parameters: returns {kind, config_json}.
std::pair<std::string, std::string> read_checkpoint_header(const std::string& path);

}  // namespace titan::nn
