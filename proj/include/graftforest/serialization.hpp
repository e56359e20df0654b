#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "graftforest/forest.hpp"

namespace graftforest {

/// Version written into every model document. Readers reject other versions.
inline constexpr int kModelSchemaVersion = 1;

/// JSON document holding the growth config, seeds, optional scaler and every tree.
/// Thresholds and leaf values use shortest round-trip decimal output, so a
/// reload reproduces them bit for bit.
std::string serialize_model(const ForestModel& forest, int indent = -1);
ForestModel deserialize_model(std::string_view text);

void save_model(const ForestModel& forest, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace graftforest
