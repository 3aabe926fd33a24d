#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "geopose/synthgen.hpp"

// JSON (de)serialization for scenes, manifests and reports. All formats
// carry format_version; lengths are meters, angles radians, matrices
// serialized row-major.

namespace geopose {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);

nlohmann::json scene_to_json(const Scene& scene, bool include_votes = false,
                             const FaceVoteSet* votes = nullptr);
Scene scene_from_json(const nlohmann::json& j);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path,
                bool include_votes = false, const FaceVoteSet* votes = nullptr);

// Stable 64-bit FNV-1a content hash (hex string) of a canonical dump.
std::string content_hash(const nlohmann::json& j);

// Write-to-temp-then-rename so partially written files never appear.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace geopose
