#include "geopose/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

namespace geopose {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (key.starts_with("_")) continue;  // note/provenance fields
        if (!allowed.contains(key))
            throw ConfigError("config: unknown key '" + where + key + "'");
    }
}

double get_positive(const json& j, const std::string& key, double fallback) {
    const double v = j.value(key, fallback);
    if (!(v > 0.0)) throw ConfigError("config: '" + key + "' must be positive");
    return v;
}

NoiseSpec noise_from_json(const json& j, const std::string& where) {
    check_keys(j,
               {"rot_normal_sigma", "vote_direction_sigma", "vote_distance_sigma",
                "trans_residual_sigma", "size_residual_sigma", "reconstruction_sigma",
                "vote_outlier_fraction", "vote_outlier_confidence",
                "reset_confidences_to_target"},
               where);
    NoiseSpec n;
    n.rot_normal_sigma = j.value("rot_normal_sigma", 0.0);
    n.vote_direction_sigma = j.value("vote_direction_sigma", 0.0);
    n.vote_distance_sigma = j.value("vote_distance_sigma", 0.0);
    n.trans_residual_sigma = j.value("trans_residual_sigma", 0.0);
    n.size_residual_sigma = j.value("size_residual_sigma", 0.0);
    n.reconstruction_sigma = j.value("reconstruction_sigma", 0.0);
    n.vote_outlier_fraction = j.value("vote_outlier_fraction", 0.0);
    n.vote_outlier_confidence = j.value("vote_outlier_confidence", 1e-6);
    n.reset_confidences_to_target = j.value("reset_confidences_to_target", true);
    try {
        n.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("config: " + where + ": " + e.what());
    }
    return n;
}

json noise_to_json(const NoiseSpec& n) {
    return {{"rot_normal_sigma", n.rot_normal_sigma},
            {"vote_direction_sigma", n.vote_direction_sigma},
            {"vote_distance_sigma", n.vote_distance_sigma},
            {"trans_residual_sigma", n.trans_residual_sigma},
            {"size_residual_sigma", n.size_residual_sigma},
            {"reconstruction_sigma", n.reconstruction_sigma},
            {"vote_outlier_fraction", n.vote_outlier_fraction},
            {"vote_outlier_confidence", n.vote_outlier_confidence},
            {"reset_confidences_to_target", n.reset_confidences_to_target}};
}

}  // namespace

Config Config::defaults() {
    Config c;
    c.noise_profiles["none"] = NoiseSpec{};

    NoiseSpec mild;
    mild.vote_direction_sigma = 0.01;
    mild.vote_distance_sigma = 0.002;
    mild.rot_normal_sigma = 0.01;
    mild.trans_residual_sigma = 0.002;
    mild.size_residual_sigma = 0.002;
    c.noise_profiles["mild"] = mild;

    NoiseSpec heavy;
    heavy.vote_direction_sigma = 0.03;
    heavy.vote_distance_sigma = 0.005;
    heavy.vote_outlier_fraction = 0.2;
    heavy.rot_normal_sigma = 0.03;
    heavy.trans_residual_sigma = 0.005;
    heavy.size_residual_sigma = 0.005;
    heavy.reconstruction_sigma = 0.005;
    c.noise_profiles["heavy"] = heavy;

    // Acceptance-style vote corruption: noisy distances plus garbage votes.
    NoiseSpec votes5mm;
    votes5mm.vote_distance_sigma = 0.005;
    votes5mm.vote_outlier_fraction = 0.2;
    c.noise_profiles["votes_5mm_outliers"] = votes5mm;
    return c;
}

const NoiseSpec& Config::profile(const std::string& name) const {
    const auto it = noise_profiles.find(name);
    if (it == noise_profiles.end())
        throw ConfigError("config: unknown noise profile '" + name + "'");
    return it->second;
}

Config config_from_json(const json& j) {
    check_keys(j,
               {"format_version", "k1", "k2", "k_s", "k_n", "k_p", "bin_count", "bin_cap",
                "bin_seed", "size_score_mode", "lambda", "refine", "noise_profiles"},
               "");
    Config c = Config::defaults();

    c.loss.k1 = get_positive(j, "k1", c.loss.k1);
    c.loss.k2 = get_positive(j, "k2", c.loss.k2);
    c.loss.score.k_s = get_positive(j, "k_s", c.loss.score.k_s);
    c.loss.score.k_n = get_positive(j, "k_n", c.loss.score.k_n);
    c.loss.score.k_p = get_positive(j, "k_p", c.loss.score.k_p);
    c.loss.score.bin_count = j.value("bin_count", c.loss.score.bin_count);
    c.loss.bin_cap = j.value("bin_cap", c.loss.bin_cap);
    c.loss.bin_seed = j.value("bin_seed", c.loss.bin_seed);
    if (c.loss.score.bin_count < 1) throw ConfigError("config: 'bin_count' must be >= 1");
    if (c.loss.bin_cap < 1) throw ConfigError("config: 'bin_cap' must be >= 1");

    const std::string mode = j.value("size_score_mode", "clamp");
    if (mode == "clamp")
        c.loss.mode = SizeScoreMode::clamp;
    else if (mode == "raw_paper")
        c.loss.mode = SizeScoreMode::raw_paper;
    else
        throw ConfigError("config: 'size_score_mode' must be clamp or raw_paper");

    if (j.contains("lambda")) {
        const json& l = j.at("lambda");
        check_keys(l, {"l1", "l2", "l3", "l4", "l5", "l6", "l7", "l8", "basic", "bb", "pc"},
                   "lambda.");
        LossWeights& w = c.loss.weights;
        w.l1 = l.value("l1", w.l1);
        w.l2 = l.value("l2", w.l2);
        w.l3 = l.value("l3", w.l3);
        w.l4 = l.value("l4", w.l4);
        w.l5 = l.value("l5", w.l5);
        w.l6 = l.value("l6", w.l6);
        w.l7 = l.value("l7", w.l7);
        w.l8 = l.value("l8", w.l8);
        w.basic = l.value("basic", w.basic);
        w.bb = l.value("bb", w.bb);
        w.pc = l.value("pc", w.pc);
        try {
            w.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("config: lambda: ") + e.what());
        }
    }

    if (j.contains("refine")) {
        const json& r = j.at("refine");
        check_keys(r,
                   {"rot_step", "trans_step", "size_step", "iterations", "backtracking",
                    "max_halvings", "huber_delta", "use_size_score"},
                   "refine.");
        c.refine.rot_step = get_positive(r, "rot_step", c.refine.rot_step);
        c.refine.trans_step = get_positive(r, "trans_step", c.refine.trans_step);
        c.refine.size_step = get_positive(r, "size_step", c.refine.size_step);
        c.refine.iterations = r.value("iterations", c.refine.iterations);
        c.refine.backtracking = r.value("backtracking", c.refine.backtracking);
        c.refine.max_halvings = r.value("max_halvings", c.refine.max_halvings);
        c.refine.huber_delta = r.value("huber_delta", c.refine.huber_delta);
        if (c.refine.iterations < 0) throw ConfigError("config: refine.iterations must be >= 0");
        if (r.value("use_size_score", false)) c.refine.weights.l5 = c.loss.weights.l5;
    }
    c.refine.score = c.loss.score;
    c.refine.bin_cap = c.loss.bin_cap;
    c.refine.bin_seed = c.loss.bin_seed;

    if (j.contains("noise_profiles")) {
        for (const auto& [name, spec] : j.at("noise_profiles").items())
            c.noise_profiles[name] = noise_from_json(spec, "noise_profiles." + name + ".");
    }
    if (!c.noise_profiles.contains("none")) c.noise_profiles["none"] = NoiseSpec{};
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

nlohmann::json config_to_json(const Config& c) {
    json j;
    j["format_version"] = 1;
    j["_note"] = "defaults follow the published hyper-parameter settings";
    j["k1"] = c.loss.k1;
    j["k2"] = c.loss.k2;
    j["k_s"] = c.loss.score.k_s;
    j["k_n"] = c.loss.score.k_n;
    j["k_p"] = c.loss.score.k_p;
    j["bin_count"] = c.loss.score.bin_count;
    j["bin_cap"] = c.loss.bin_cap;
    j["bin_seed"] = c.loss.bin_seed;
    j["size_score_mode"] = c.loss.mode == SizeScoreMode::clamp ? "clamp" : "raw_paper";
    j["lambda"] = {{"l1", c.loss.weights.l1},   {"l2", c.loss.weights.l2},
                   {"l3", c.loss.weights.l3},   {"l4", c.loss.weights.l4},
                   {"l5", c.loss.weights.l5},   {"l6", c.loss.weights.l6},
                   {"l7", c.loss.weights.l7},   {"l8", c.loss.weights.l8},
                   {"basic", c.loss.weights.basic}, {"bb", c.loss.weights.bb},
                   {"pc", c.loss.weights.pc}};
    j["refine"] = {{"rot_step", c.refine.rot_step},
                   {"trans_step", c.refine.trans_step},
                   {"size_step", c.refine.size_step},
                   {"iterations", c.refine.iterations},
                   {"backtracking", c.refine.backtracking},
                   {"max_halvings", c.refine.max_halvings},
                   {"huber_delta", c.refine.huber_delta},
                   {"use_size_score", c.refine.weights.l5 > 0.0}};
    json profiles;
    for (const auto& [name, spec] : c.noise_profiles) profiles[name] = noise_to_json(spec);
    j["noise_profiles"] = std::move(profiles);
    return j;
}

}  // namespace geopose
