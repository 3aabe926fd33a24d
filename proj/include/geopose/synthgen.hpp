#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "geopose/bbox_voting.hpp"
#include "geopose/core.hpp"

// Synthetic scene factory standing in for the trained per-point network:
// category-like shapes, camera-frame clouds with noise/outliers/occlusion,
// exact vote sets and confidence targets, and corrupted prediction bundles.

namespace geopose {

enum class ShapeKind { box, cylinder, laptop };

const char* shape_name(ShapeKind shape);
ShapeKind parse_shape(const std::string& name);

struct SceneSpec {
    ShapeKind shape = ShapeKind::box;
    Vec3 size = Vec3(0.2, 0.2, 0.2);   // requested extents (meters)
    std::optional<Pose> pose;          // nullopt: random from seed
    int n_points = 1028;
    double noise_sigma = 0.0;          // camera-frame Gaussian, meters
    double outlier_fraction = 0.0;     // in [0, 1)
    std::optional<Vec3> view_dir;      // toward the viewer; nullopt: -t/|t|
    std::uint64_t seed = 0;
    double hinge_angle_deg = 75.0;     // laptop screen angle from the base plane

    void validate() const;
};

struct Scene {
    PointCloud cloud;   // camera frame, canonical correspondences attached
    Pose gt;
    CategoryPrior prior;
    std::vector<bool> outlier_mask;   // per point
    std::set<FaceId> visible_faces;
    SceneSpec spec;
};

// Deterministic per seed; surface points are sampled on viewer-facing
// surface only (exact back-face culling for boxes), outliers uniformly in
// an inflated box. For hinged shapes the ground-truth size is the exact
// bounding box of the generated geometry, recentred on the origin.
Scene generate_scene(const SceneSpec& spec);

enum class VoteConfidenceMode {
    exact,           // confidence 1 for every inlier vote
    distance_shaped  // exp(-face_distance / k2): closer points score higher
};

// Exact votes: for every point and face, the (direction, distance) that
// lands the point on the ground-truth face plane along the face normal.
// Outlier points receive near-zero confidence.
FaceVoteSet ground_truth_votes(const Scene& scene,
                               VoteConfidenceMode mode = VoteConfidenceMode::exact,
                               double k2 = 1.0 / 303.5);

struct PredictionBundle {
    RotationPrediction rotation;
    Vec3 t_residual;
    Vec3 s_residual;
    FaceVoteSet votes;
    PointCloud reconstruction;
};

// The bundle an ideal network would emit for this scene.
PredictionBundle exact_bundle(const Scene& scene, double k1 = 13.7, double k2 = 1.0 / 303.5);

struct NoiseSpec {
    double rot_normal_sigma = 0.0;
    double vote_direction_sigma = 0.0;
    double vote_distance_sigma = 0.0;
    double trans_residual_sigma = 0.0;
    double size_residual_sigma = 0.0;
    double reconstruction_sigma = 0.0;
    double vote_outlier_fraction = 0.0;     // fraction of votes per face degraded to garbage
    double vote_outlier_confidence = 1e-6;  // assigned to degraded votes
    // Re-derive confidences as the ground-truth targets of the corrupted
    // predictions (an ideal confidence head); outlier votes keep the
    // forced low confidence either way.
    bool reset_confidences_to_target = true;

    void validate() const;
    bool is_zero() const;
};

PredictionBundle corrupt_bundle(const PredictionBundle& bundle, const Scene& scene,
                                const NoiseSpec& noise, std::uint64_t seed, double k1 = 13.7,
                                double k2 = 1.0 / 303.5);

}  // namespace geopose
