#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "geopose/losses.hpp"
#include "geopose/solver.hpp"
#include "geopose/synthgen.hpp"

// One structured configuration object holding every hyperparameter, with
// defaults matching the published settings. Files may override any subset
// of keys; unknown keys are rejected with the offending name.

namespace geopose {

struct ConfigError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

struct Config {
    LossParams loss;                                 // k1, k2, size score, lambda weights
    RefineConfig refine;
    std::map<std::string, NoiseSpec> noise_profiles;  // "none" always present

    static Config defaults();

    const NoiseSpec& profile(const std::string& name) const;
};

Config load_config(const std::filesystem::path& path);
Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& config);

}  // namespace geopose
