#include "geopose/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geopose/rng.hpp"
#include "geopose/rotation_recovery.hpp"
#include "geopose/symmetry.hpp"

namespace geopose {

namespace {

constexpr double kOutlierPointConfidence = 1e-6;
constexpr double kVisibleEps = 1e-9;

// Rectangular surface patch: center +- hu +- hv, outward unit normal.
struct Patch {
    Vec3 center;
    Vec3 hu;
    Vec3 hv;
    Vec3 normal;

    double area() const { return 4.0 * hu.norm() * hv.norm(); }
};

void append_box_patches(std::vector<Patch>& out, const Vec3& center, const Mat3& axes,
                        const Vec3& extents) {
    for (int a = 0; a < 3; ++a) {
        const int u = (a + 1) % 3;
        const int v = (a + 2) % 3;
        for (double sign : {1.0, -1.0}) {
            Patch p;
            p.normal = sign * axes.col(a);
            p.center = center + p.normal * (extents[a] / 2.0);
            p.hu = axes.col(u) * (extents[u] / 2.0);
            p.hv = axes.col(v) * (extents[v] / 2.0);
            out.push_back(p);
        }
    }
}

struct CanonicalGeometry {
    std::vector<Patch> patches;  // box and laptop
    bool cylinder = false;
    double radius = 0.0;
    double half_height = 0.0;
    Vec3 extents = Vec3::Zero();  // exact bounding box
};

CanonicalGeometry build_geometry(const SceneSpec& spec) {
    CanonicalGeometry geom;
    switch (spec.shape) {
        case ShapeKind::box: {
            append_box_patches(geom.patches, Vec3::Zero(), Mat3::Identity(), spec.size);
            geom.extents = spec.size;
            break;
        }
        case ShapeKind::cylinder: {
            geom.cylinder = true;
            geom.radius = spec.size.x() / 2.0;
            geom.half_height = spec.size.y() / 2.0;
            geom.extents = Vec3(spec.size.x(), spec.size.y(), spec.size.x());
            break;
        }
        case ShapeKind::laptop: {
            const Vec3& s = spec.size;
            const double beta = spec.hinge_angle_deg * std::numbers::pi / 180.0;
            const double tb = 0.12 * s.y();       // base thickness
            const double ts = 0.06 * s.z();       // screen thickness
            const Vec3 base_center(0.0, -s.y() / 2.0 + tb / 2.0, 0.0);
            const Vec3 base_extents(s.x(), tb, s.z());
            append_box_patches(geom.patches, base_center, Mat3::Identity(), base_extents);

            // Screen slab hinged at the back-top edge of the base, rising
            // at `beta` from the base plane and leaning over it.
            const Vec3 hinge(0.0, -s.y() / 2.0 + tb, -s.z() / 2.0);
            const Vec3 dir(0.0, std::sin(beta), std::cos(beta));
            const Vec3 screen_normal(0.0, -std::cos(beta), std::sin(beta));
            const double length = (s.y() - tb) / std::sin(beta);
            Mat3 screen_axes;
            screen_axes.col(0) = Vec3::UnitX();
            screen_axes.col(1) = dir;
            screen_axes.col(2) = screen_normal;
            const Vec3 screen_center = hinge + dir * (length / 2.0) + screen_normal * (ts / 2.0);
            append_box_patches(geom.patches, screen_center, screen_axes,
                               Vec3(s.x(), length, ts));

            // Exact bounding box of all patch corners, recentred on the origin.
            Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
            Vec3 hi = -lo;
            for (const Patch& p : geom.patches) {
                for (double su : {-1.0, 1.0}) {
                    for (double sv : {-1.0, 1.0}) {
                        const Vec3 corner = p.center + su * p.hu + sv * p.hv;
                        lo = lo.cwiseMin(corner);
                        hi = hi.cwiseMax(corner);
                    }
                }
            }
            const Vec3 offset = (lo + hi) / 2.0;
            for (Patch& p : geom.patches) p.center -= offset;
            geom.extents = hi - lo;
            break;
        }
    }
    return geom;
}

SymmetrySpec shape_symmetry(ShapeKind shape) {
    switch (shape) {
        case ShapeKind::box: return SymmetrySpec::none();
        case ShapeKind::cylinder: return SymmetrySpec::rotational(Vec3::UnitY());
        case ShapeKind::laptop: return SymmetrySpec::reflection(Vec3::UnitX());
    }
    throw InvalidArgument("shape_symmetry: bad shape");
}

// Canonical-frame surface point drawn uniformly over the viewer-facing area.
Vec3 sample_visible_surface(const CanonicalGeometry& geom, const Vec3& view_canonical, Rng& rng) {
    if (!geom.cylinder) {
        thread_local std::vector<const Patch*> visible;
        thread_local std::vector<double> cumulative;
        visible.clear();
        cumulative.clear();
        double total = 0.0;
        for (const Patch& p : geom.patches) {
            if (p.normal.dot(view_canonical) > kVisibleEps) {
                visible.push_back(&p);
                total += p.area();
                cumulative.push_back(total);
            }
        }
        if (visible.empty() || total <= 0.0)
            throw DegenerateInput("generate_scene: no visible surface from this viewpoint");
        const double pick = rng.uniform01() * total;
        std::size_t idx =
            std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
        idx = std::min(idx, visible.size() - 1);
        const Patch& p = *visible[idx];
        return p.center + rng.uniform(-1.0, 1.0) * p.hu + rng.uniform(-1.0, 1.0) * p.hv;
    }

    // Cylinder: visible lateral arc plus viewer-facing caps.
    const double r = geom.radius;
    const double hh = geom.half_height;
    const double wx = view_canonical.x();
    const double wz = view_canonical.z();
    const double w_norm = std::hypot(wx, wz);
    const double cap_area = std::numbers::pi * r * r;
    const double lateral_area = w_norm > kVisibleEps ? std::numbers::pi * r * 2.0 * hh : 0.0;
    const double top_area = view_canonical.y() > kVisibleEps ? cap_area : 0.0;
    const double bottom_area = view_canonical.y() < -kVisibleEps ? cap_area : 0.0;
    const double total = lateral_area + top_area + bottom_area;
    if (total <= 0.0)
        throw DegenerateInput("generate_scene: no visible surface from this viewpoint");

    double pick = rng.uniform01() * total;
    if (pick < lateral_area) {
        const double phi0 = std::atan2(wz, wx);
        const double phi = phi0 + rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
        const double y = rng.uniform(-hh, hh);
        return Vec3(r * std::cos(phi), y, r * std::sin(phi));
    }
    pick -= lateral_area;
    const double y = pick < top_area ? hh : -hh;
    const double rad = r * std::sqrt(rng.uniform01());
    const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return Vec3(rad * std::cos(ang), y, rad * std::sin(ang));
}

Vec3 random_unit(Rng& rng) {
    Vec3 v;
    do {
        v = Vec3(rng.normal(), rng.normal(), rng.normal());
    } while (v.norm() < 1e-6);
    return v.normalized();
}

}  // namespace

const char* shape_name(ShapeKind shape) {
    switch (shape) {
        case ShapeKind::box: return "box";
        case ShapeKind::cylinder: return "cylinder";
        case ShapeKind::laptop: return "laptop";
    }
    throw InvalidArgument("shape_name: bad shape");
}

ShapeKind parse_shape(const std::string& name) {
    if (name == "box") return ShapeKind::box;
    if (name == "cylinder") return ShapeKind::cylinder;
    if (name == "laptop") return ShapeKind::laptop;
    throw InvalidArgument("shape: unknown value '" + name + "' (expected box|cylinder|laptop)");
}

void SceneSpec::validate() const {
    require_finite(size, "SceneSpec.size");
    if ((size.array() <= 0.0).any()) throw InvalidArgument("SceneSpec.size: must be positive");
    if (n_points <= 0) throw InvalidArgument("SceneSpec.n_points: must be positive");
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("SceneSpec.noise_sigma: must be >= 0");
    if (!(outlier_fraction >= 0.0) || outlier_fraction >= 1.0)
        throw InvalidArgument("SceneSpec.outlier_fraction: must lie in [0, 1)");
    if (!(hinge_angle_deg > 10.0) || hinge_angle_deg > 90.0)
        throw InvalidArgument("SceneSpec.hinge_angle_deg: must lie in (10, 90]");
    if (view_dir && view_dir->norm() < tol::kUnitNorm)
        throw InvalidArgument("SceneSpec.view_dir: zero vector");
}

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    Mat3 R;
    Vec3 t;
    if (spec.pose) {
        R = spec.pose->rotation();
        t = spec.pose->translation();
    } else {
        R = rng.rotation();
        t = Vec3(rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25), rng.uniform(0.6, 1.4));
    }

    const CanonicalGeometry geom = build_geometry(spec);
    const Pose gt(R, t, geom.extents);

    const Vec3 jitter(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    const Vec3 mean_size = geom.extents.cwiseProduct(Vec3::Ones() + jitter);
    const CategoryPrior prior(mean_size, shape_symmetry(spec.shape));

    Vec3 view;
    if (spec.view_dir) {
        view = spec.view_dir->normalized();
    } else if (t.norm() > 1e-9) {
        view = -t.normalized();
    } else {
        view = -Vec3::UnitZ();
    }
    const Vec3 view_canonical = R.transpose() * view;

    std::set<FaceId> visible;
    for (FaceId f : kAllFaces)
        if (world_face_normal(f, gt).dot(view) > kVisibleEps) visible.insert(f);

    const int n = spec.n_points;
    const int n_outliers = static_cast<int>(std::lround(spec.outlier_fraction * n));
    const int n_surface = n - n_outliers;

    std::vector<Vec3> points;
    std::vector<Vec3> canonical;
    std::vector<bool> outlier_mask;
    points.reserve(n);
    canonical.reserve(n);
    outlier_mask.reserve(n);

    for (int i = 0; i < n_surface; ++i) {
        const Vec3 q = sample_visible_surface(geom, view_canonical, rng);
        Vec3 p = gt.to_camera(q);
        if (spec.noise_sigma > 0.0) p += rng.normal_vec3(spec.noise_sigma);
        points.push_back(p);
        canonical.push_back(q);
        outlier_mask.push_back(false);
    }
    const Vec3 inflated = 0.75 * geom.extents + Vec3::Constant(0.05);
    for (int i = 0; i < n_outliers; ++i) {
        const Vec3 q(rng.uniform(-inflated.x(), inflated.x()),
                     rng.uniform(-inflated.y(), inflated.y()),
                     rng.uniform(-inflated.z(), inflated.z()));
        points.push_back(gt.to_camera(q));
        canonical.push_back(q);
        outlier_mask.push_back(true);
    }

    return Scene{PointCloud(std::move(points), std::move(canonical)), gt, prior,
                 std::move(outlier_mask), std::move(visible), spec};
}

FaceVoteSet ground_truth_votes(const Scene& scene, VoteConfidenceMode mode, double k2) {
    if (k2 <= 0.0) throw InvalidArgument("ground_truth_votes: k2 must be positive");
    const std::size_t n = scene.cloud.size();
    std::array<FaceVoteSet::FaceVotes, 6> votes;

    for (FaceId face : kAllFaces) {
        auto& fv = votes[static_cast<std::size_t>(face)];
        fv.directions.reserve(n);
        fv.distances.reserve(n);
        fv.confidences.reserve(n);
        const Vec3 normal = world_face_normal(face, scene.gt);
        for (std::size_t j = 0; j < n; ++j) {
            // Same expression as the confidence target, so exact votes score
            // exactly 1. Points on the face itself may come out a few ulp on
            // the wrong side of zero; they vote along the outward normal.
            const double delta = face_distance(scene.cloud.points()[j], face, scene.gt);
            fv.directions.push_back(delta >= -1e-12 ? normal : Vec3(-normal));
            fv.distances.push_back(std::abs(delta));
            double conf;
            if (scene.outlier_mask[j]) {
                conf = kOutlierPointConfidence;
            } else if (mode == VoteConfidenceMode::exact) {
                conf = 1.0;
            } else {
                conf = std::max(std::exp(-std::abs(delta) / k2), 1e-300);
            }
            fv.confidences.push_back(conf);
        }
    }
    return FaceVoteSet(n, std::move(votes));
}

PredictionBundle exact_bundle(const Scene& scene, double /*k1*/, double k2) {
    const Mat3& R = scene.gt.rotation();
    RotationPrediction rot(R.col(0), R.col(1), 1.0, 1.0);
    const Vec3 t_res = scene.gt.translation() - point_cloud_mean(scene.cloud);
    const Vec3 s_res = scene.gt.size() - scene.prior.mean_size();
    FaceVoteSet votes = ground_truth_votes(scene, VoteConfidenceMode::exact, k2);
    PointCloud recon = symmetry_map(scene.cloud, scene.gt, scene.gt, scene.prior.symmetry());
    return PredictionBundle{std::move(rot), t_res, s_res, std::move(votes), std::move(recon)};
}

void NoiseSpec::validate() const {
    for (double v : {rot_normal_sigma, vote_direction_sigma, vote_distance_sigma,
                     trans_residual_sigma, size_residual_sigma, reconstruction_sigma})
        if (!(v >= 0.0)) throw InvalidArgument("NoiseSpec: sigmas must be >= 0");
    if (!(vote_outlier_fraction >= 0.0) || vote_outlier_fraction >= 1.0)
        throw InvalidArgument("NoiseSpec.vote_outlier_fraction: must lie in [0, 1)");
    if (!(vote_outlier_confidence > 0.0) || vote_outlier_confidence > 1e-3)
        throw InvalidArgument("NoiseSpec.vote_outlier_confidence: must lie in (0, 1e-3]");
}

bool NoiseSpec::is_zero() const {
    return rot_normal_sigma == 0.0 && vote_direction_sigma == 0.0 && vote_distance_sigma == 0.0 &&
           trans_residual_sigma == 0.0 && size_residual_sigma == 0.0 &&
           reconstruction_sigma == 0.0 && vote_outlier_fraction == 0.0;
}

PredictionBundle corrupt_bundle(const PredictionBundle& bundle, const Scene& scene,
                                const NoiseSpec& noise, std::uint64_t seed, double k1, double k2) {
    noise.validate();
    if (noise.is_zero()) return bundle;
    const std::size_t n = bundle.votes.n_points();
    if (n != scene.cloud.size())
        throw InvalidArgument("corrupt_bundle: bundle does not match scene");

    Rng head_rng(mix_seed(seed, 1));
    Vec3 rx = bundle.rotation.r_x();
    Vec3 ry = bundle.rotation.r_y();
    if (noise.rot_normal_sigma > 0.0) {
        rx = (rx + head_rng.normal_vec3(noise.rot_normal_sigma)).normalized();
        ry = (ry + head_rng.normal_vec3(noise.rot_normal_sigma)).normalized();
    }
    double cx = bundle.rotation.c_x();
    double cy = bundle.rotation.c_y();
    if (noise.reset_confidences_to_target) {
        const Mat3& gt_R = scene.gt.rotation();
        cx = rotation_confidence_target(rx, gt_R.col(0), k1);
        cy = rotation_confidence_target(ry, gt_R.col(1), k1);
    }
    RotationPrediction rot(rx, ry, cx, cy);

    const Vec3 t_res = bundle.t_residual + (noise.trans_residual_sigma > 0.0
                                                ? head_rng.normal_vec3(noise.trans_residual_sigma)
                                                : Vec3::Zero());
    const Vec3 s_res = bundle.s_residual + (noise.size_residual_sigma > 0.0
                                                ? head_rng.normal_vec3(noise.size_residual_sigma)
                                                : Vec3::Zero());

    const double box_diag = scene.gt.size().norm();
    std::array<FaceVoteSet::FaceVotes, 6> votes;
    for (FaceId face : kAllFaces) {
        const auto& src = bundle.votes.face(face);
        auto& dst = votes[static_cast<std::size_t>(face)];
        dst = src;
        Rng face_rng(mix_seed(seed, 16 + static_cast<std::uint64_t>(face)));
        for (std::size_t j = 0; j < n; ++j) {
            if (noise.vote_direction_sigma > 0.0)
                dst.directions[j] =
                    (dst.directions[j] + face_rng.normal_vec3(noise.vote_direction_sigma))
                        .normalized();
            if (noise.vote_distance_sigma > 0.0)
                dst.distances[j] = std::max(
                    0.0, dst.distances[j] + face_rng.normal() * noise.vote_distance_sigma);
        }

        std::vector<std::size_t> order(n);
        for (std::size_t j = 0; j < n; ++j) order[j] = j;
        const std::size_t n_bad =
            static_cast<std::size_t>(std::floor(noise.vote_outlier_fraction * n));
        for (std::size_t k = 0; k < n_bad; ++k) {
            const std::size_t pick = k + face_rng.index(order.size() - k);
            std::swap(order[k], order[pick]);
        }
        std::vector<bool> degraded(n, false);
        for (std::size_t k = 0; k < n_bad; ++k) {
            const std::size_t j = order[k];
            degraded[j] = true;
            dst.directions[j] = random_unit(face_rng);
            dst.distances[j] = face_rng.uniform(0.0, 2.0 * box_diag);
        }

        for (std::size_t j = 0; j < n; ++j) {
            if (degraded[j]) {
                dst.confidences[j] = noise.vote_outlier_confidence;
            } else if (noise.reset_confidences_to_target && !scene.outlier_mask[j]) {
                dst.confidences[j] =
                    vote_confidence_target(dst.distances[j], dst.directions[j],
                                           scene.cloud.points()[j], face, scene.gt, k2);
                dst.confidences[j] = std::max(dst.confidences[j], 1e-300);
            }
        }
    }

    std::vector<Vec3> recon = bundle.reconstruction.points();
    if (noise.reconstruction_sigma > 0.0) {
        Rng recon_rng(mix_seed(seed, 99));
        for (auto& p : recon) p += recon_rng.normal_vec3(noise.reconstruction_sigma);
    }

    return PredictionBundle{std::move(rot), t_res, s_res, FaceVoteSet(n, std::move(votes)),
                            PointCloud(std::move(recon))};
}

}  // namespace geopose
