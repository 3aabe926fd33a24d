#include "geopose/scene_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace geopose {

namespace {

using nlohmann::json;

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw InvalidArgument("scene file: expected a 3-element array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json mat3_to_json(const Mat3& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rows.push_back(m(r, c));
    return rows;
}

Mat3 mat3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 9)
        throw InvalidArgument("scene file: expected a 9-element row-major matrix");
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = j[static_cast<std::size_t>(r * 3 + c)].get<double>();
    return m;
}

json symmetry_to_json(const SymmetrySpec& sym) {
    json j;
    switch (sym.kind) {
        case SymmetryKind::none: j["kind"] = "none"; break;
        case SymmetryKind::reflection:
            j["kind"] = "reflection";
            j["plane_normal"] = vec3_to_json(sym.axis);
            break;
        case SymmetryKind::rotational:
            j["kind"] = "rotational";
            j["axis"] = vec3_to_json(sym.axis);
            break;
    }
    return j;
}

SymmetrySpec symmetry_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") return SymmetrySpec::none();
    if (kind == "reflection") return SymmetrySpec::reflection(vec3_from_json(j.at("plane_normal")));
    if (kind == "rotational") return SymmetrySpec::rotational(vec3_from_json(j.at("axis")));
    throw InvalidArgument("symmetry.kind: unknown value '" + kind + "'");
}

}  // namespace

nlohmann::json pose_to_json(const Pose& pose) {
    json j;
    j["R"] = mat3_to_json(pose.rotation());
    j["t"] = vec3_to_json(pose.translation());
    j["s"] = vec3_to_json(pose.size());
    return j;
}

Pose pose_from_json(const nlohmann::json& j) {
    return Pose(mat3_from_json(j.at("R")), vec3_from_json(j.at("t")), vec3_from_json(j.at("s")));
}

nlohmann::json scene_to_json(const Scene& scene, bool include_votes, const FaceVoteSet* votes) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "scene";
    j["units"] = {{"length", "meters"}, {"angle", "radians"}};

    json spec;
    spec["shape"] = shape_name(scene.spec.shape);
    spec["size"] = vec3_to_json(scene.spec.size);
    spec["n_points"] = scene.spec.n_points;
    spec["noise_sigma"] = scene.spec.noise_sigma;
    spec["outlier_fraction"] = scene.spec.outlier_fraction;
    spec["seed"] = scene.spec.seed;
    spec["hinge_angle_deg"] = scene.spec.hinge_angle_deg;
    if (scene.spec.view_dir) spec["view_dir"] = vec3_to_json(*scene.spec.view_dir);
    if (scene.spec.pose) spec["pose"] = pose_to_json(*scene.spec.pose);
    j["spec"] = spec;

    j["gt_pose"] = pose_to_json(scene.gt);
    j["prior"] = {{"mean_size", vec3_to_json(scene.prior.mean_size())},
                  {"symmetry", symmetry_to_json(scene.prior.symmetry())}};

    json points = json::array();
    json canonical = json::array();
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        points.push_back(vec3_to_json(scene.cloud.points()[i]));
        canonical.push_back(vec3_to_json(scene.cloud.canonical()[i]));
    }
    j["points"] = std::move(points);
    j["canonical"] = std::move(canonical);

    json mask = json::array();
    for (bool b : scene.outlier_mask) mask.push_back(b);
    j["outlier_mask"] = std::move(mask);

    json faces = json::array();
    for (FaceId f : scene.visible_faces) faces.push_back(face_name(f));
    j["visible_faces"] = std::move(faces);

    if (include_votes && votes) {
        json jv;
        for (FaceId f : kAllFaces) {
            const auto& fv = votes->face(f);
            json dirs = json::array();
            json dists = json::array();
            json confs = json::array();
            for (std::size_t i = 0; i < votes->n_points(); ++i) {
                dirs.push_back(vec3_to_json(fv.directions[i]));
                dists.push_back(fv.distances[i]);
                confs.push_back(fv.confidences[i]);
            }
            jv[face_name(f)] = {{"directions", std::move(dirs)},
                                {"distances", std::move(dists)},
                                {"confidences", std::move(confs)}};
        }
        j["votes"] = std::move(jv);
    }
    return j;
}

Scene scene_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "scene") throw InvalidArgument("scene file: kind is not 'scene'");
    if (j.value("format_version", -1) != kFormatVersion)
        throw InvalidArgument("scene file: unsupported format_version");

    const json& spec_j = j.at("spec");
    SceneSpec spec;
    spec.shape = parse_shape(spec_j.at("shape").get<std::string>());
    spec.size = vec3_from_json(spec_j.at("size"));
    spec.n_points = spec_j.at("n_points").get<int>();
    spec.noise_sigma = spec_j.at("noise_sigma").get<double>();
    spec.outlier_fraction = spec_j.at("outlier_fraction").get<double>();
    spec.seed = spec_j.at("seed").get<std::uint64_t>();
    spec.hinge_angle_deg = spec_j.value("hinge_angle_deg", 75.0);
    if (spec_j.contains("view_dir")) spec.view_dir = vec3_from_json(spec_j.at("view_dir"));
    if (spec_j.contains("pose")) spec.pose = pose_from_json(spec_j.at("pose"));

    const Pose gt = pose_from_json(j.at("gt_pose"));
    const json& prior_j = j.at("prior");
    const CategoryPrior prior(vec3_from_json(prior_j.at("mean_size")),
                              symmetry_from_json(prior_j.at("symmetry")));

    const json& points_j = j.at("points");
    const json& canonical_j = j.at("canonical");
    if (points_j.size() != canonical_j.size() || points_j.empty())
        throw InvalidArgument("scene file: points/canonical arrays inconsistent");
    std::vector<Vec3> points;
    std::vector<Vec3> canonical;
    points.reserve(points_j.size());
    canonical.reserve(points_j.size());
    for (std::size_t i = 0; i < points_j.size(); ++i) {
        points.push_back(vec3_from_json(points_j[i]));
        canonical.push_back(vec3_from_json(canonical_j[i]));
    }

    std::vector<bool> mask;
    for (const auto& b : j.at("outlier_mask")) mask.push_back(b.get<bool>());
    if (mask.size() != points.size())
        throw InvalidArgument("scene file: outlier_mask length mismatch");

    std::set<FaceId> visible;
    for (const auto& name : j.at("visible_faces")) visible.insert(parse_face(name));

    return Scene{PointCloud(std::move(points), std::move(canonical)), gt, prior, std::move(mask),
                 std::move(visible), spec};
}

Scene load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open scene file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidArgument("scene file " + path.string() + ": " + e.what());
    }
    return scene_from_json(j);
}

void save_scene(const Scene& scene, const std::filesystem::path& path, bool include_votes,
                const FaceVoteSet* votes) {
    atomic_write(path, scene_to_json(scene, include_votes, votes).dump());
}

std::string content_hash(const nlohmann::json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
        out << contents;
        if (!out.good()) throw std::runtime_error("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace geopose
