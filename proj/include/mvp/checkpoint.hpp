#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mvp/model.hpp"

namespace mvp {

inline constexpr int kCheckpointVersion = 1;

/// JSON tensor container: format tag, version, model shape (including the
/// expert count), encoder kind, and one entry per tensor holding its shape
/// and a flattened row-major array. Doubles are written in shortest
/// round-trip form, so save followed by load is exact.
nlohmann::json checkpoint_to_json(const MvpModel& model);
MvpModel checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const MvpModel& model);
MvpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace mvp
