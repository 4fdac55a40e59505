#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "collab/forest.hpp"

namespace collab {

inline constexpr int kModelFormatVersion = 1;

/// One JSON document on the first line, then `crc32 <8 hex digits>` over
/// that line. Doubles are written with round-trip precision; infinities as
/// the string "inf".
std::string serialize_model(const EnsembleModel& model);

/// Throws Truncated (no checksum line), Checksum (mismatch), Version
/// (unsupported format version) or Schema (malformed document).
EnsembleModel deserialize_model(std::string_view text);

void save_model(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_model(const std::filesystem::path& path);

}  // namespace collab
