#pragma once

#include <string>

#include "driveintent/predictor.hpp"

namespace driveintent {

/// Writes/reads a model bank as structured text (JSON). Round-trips exactly.
void save_model_bank(const ModelBank& bank, const std::string& path);
ModelBank load_model_bank(const std::string& path);

}  // namespace driveintent
