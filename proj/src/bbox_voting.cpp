#include "geopose/bbox_voting.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

namespace geopose {

int face_axis(FaceId face) {
    switch (face) {
        case FaceId::x_pos:
        case FaceId::x_neg: return 0;
        case FaceId::y_pos:
        case FaceId::y_neg: return 1;
        case FaceId::z_pos:
        case FaceId::z_neg: return 2;
    }
    throw InvalidArgument("face_axis: bad FaceId");
}

double face_sign(FaceId face) {
    switch (face) {
        case FaceId::x_pos:
        case FaceId::y_pos:
        case FaceId::z_pos: return 1.0;
        default: return -1.0;
    }
}

FaceId opposite_face(FaceId face) {
    switch (face) {
        case FaceId::x_pos: return FaceId::x_neg;
        case FaceId::x_neg: return FaceId::x_pos;
        case FaceId::y_pos: return FaceId::y_neg;
        case FaceId::y_neg: return FaceId::y_pos;
        case FaceId::z_pos: return FaceId::z_neg;
        case FaceId::z_neg: return FaceId::z_pos;
    }
    throw InvalidArgument("opposite_face: bad FaceId");
}

FaceId face_from_axis(int axis, bool positive) {
    switch (axis) {
        case 0: return positive ? FaceId::x_pos : FaceId::x_neg;
        case 1: return positive ? FaceId::y_pos : FaceId::y_neg;
        case 2: return positive ? FaceId::z_pos : FaceId::z_neg;
    }
    throw InvalidArgument("face_from_axis: axis must be 0, 1 or 2");
}

Vec3 canonical_face_normal(FaceId face) {
    Vec3 n = Vec3::Zero();
    n[face_axis(face)] = face_sign(face);
    return n;
}

const char* face_name(FaceId face) {
    switch (face) {
        case FaceId::y_pos: return "y+";
        case FaceId::y_neg: return "y-";
        case FaceId::x_pos: return "x+";
        case FaceId::x_neg: return "x-";
        case FaceId::z_pos: return "z+";
        case FaceId::z_neg: return "z-";
    }
    throw InvalidArgument("face_name: bad FaceId");
}

FaceId parse_face(const std::string& name) {
    for (FaceId f : kAllFaces)
        if (name == face_name(f)) return f;
    throw InvalidArgument("parse_face: unknown face '" + name + "'");
}

FaceVoteSet::FaceVoteSet(std::size_t n_points, std::array<FaceVotes, 6> votes)
    : n_points_(n_points), votes_(std::move(votes)) {
    if (n_points_ == 0) throw InvalidArgument("FaceVoteSet: empty");
    for (FaceId f : kAllFaces) {
        const auto& v = votes_[static_cast<std::size_t>(f)];
        if (v.directions.size() != n_points_ || v.distances.size() != n_points_ ||
            v.confidences.size() != n_points_)
            throw InvalidArgument("FaceVoteSet: per-face vote counts differ from point count");
        for (std::size_t j = 0; j < n_points_; ++j) {
            require_finite(v.directions[j], "FaceVoteSet.direction");
            if (std::abs(v.directions[j].norm() - 1.0) > tol::kOrthonormal)
                throw InvalidArgument("FaceVoteSet: vote direction not unit length");
            if (!(v.distances[j] >= 0.0) || !std::isfinite(v.distances[j]))
                throw InvalidArgument("FaceVoteSet: vote distance must be >= 0");
            if (!(v.confidences[j] > 0.0) || v.confidences[j] > 1.0)
                throw InvalidArgument("FaceVoteSet: vote confidence must lie in (0, 1]");
        }
    }
}

PlaneParams::PlaneParams(const Vec3& normal, double distance) : N(normal), D(distance) {
    require_finite(N, "PlaneParams.N");
    if (!std::isfinite(D)) throw InvalidArgument("PlaneParams.D: non-finite");
    if (std::abs(N.norm() - 1.0) > tol::kOrthonormal)
        throw InvalidArgument("PlaneParams.N: must be unit length");
}

std::vector<Vec3> project_votes(const PointCloud& cloud, const FaceVoteSet& votes, FaceId face) {
    if (votes.n_points() != cloud.size())
        throw InvalidArgument("project_votes: vote set size does not match point cloud");
    const auto& fv = votes.face(face);
    std::vector<Vec3> out;
    out.reserve(cloud.size());
    for (std::size_t j = 0; j < cloud.size(); ++j)
        out.push_back(cloud.points()[j] + fv.directions[j] * fv.distances[j]);
    return out;
}

PlaneParams fit_plane_weighted(std::span<const Vec3> points, std::span<const double> weights,
                               const std::optional<Vec3>& orientation_hint) {
    if (points.size() != weights.size())
        throw InvalidArgument("fit_plane_weighted: point/weight count mismatch");
    double total_weight = 0.0;
    std::size_t effective = 0;
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (!std::isfinite(weights[j]) || weights[j] < 0.0)
            throw InvalidArgument("fit_plane_weighted: weights must be finite and >= 0");
        total_weight += weights[j];
        if (weights[j] > tol::kMinEffectiveWeight) ++effective;
    }
    if (effective < 3 || total_weight <= 0.0)
        throw DegenerateInput("fit_plane_weighted: fewer than 3 effective points");

    Vec3 centroid = Vec3::Zero();
    for (std::size_t j = 0; j < points.size(); ++j) centroid += weights[j] * points[j];
    centroid /= total_weight;

    Mat3 scatter = Mat3::Zero();
    for (std::size_t j = 0; j < points.size(); ++j) {
        const Vec3 d = points[j] - centroid;
        scatter += weights[j] * (d * d.transpose());
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    const Vec3 evals = eig.eigenvalues();  // ascending
    if (evals[2] <= 0.0 || evals[1] <= 1e-9 * evals[2])
        throw DegenerateInput("fit_plane_weighted: support is collinear (rank-deficient scatter)");

    Vec3 normal = eig.eigenvectors().col(0);
    double dist = normal.dot(centroid);
    bool flip = false;
    if (orientation_hint && orientation_hint->norm() > tol::kUnitNorm) {
        flip = normal.dot(*orientation_hint) < 0.0;
    } else if (std::abs(dist) > tol::kUnitNorm) {
        flip = dist < 0.0;
    } else {
        for (int k = 0; k < 3; ++k) {
            if (std::abs(normal[k]) > tol::kUnitNorm) {
                flip = normal[k] < 0.0;
                break;
            }
        }
    }
    if (flip) {
        normal = -normal;
        dist = -dist;
    }
    return PlaneParams(normal.normalized(), dist);
}

double face_distance(const Vec3& p, FaceId face, const Pose& gt) {
    const Vec3 q = gt.to_canonical(p);
    const int a = face_axis(face);
    return gt.size()[a] / 2.0 - face_sign(face) * q[a];
}

double vote_confidence_target(double d, const Vec3& n, const Vec3& p, FaceId face, const Pose& gt,
                              double k2) {
    if (k2 <= 0.0) throw InvalidArgument("vote_confidence_target: k2 must be positive");
    require_finite(n, "vote_confidence_target.n");
    require_finite(p, "vote_confidence_target.p");
    const double f = face_distance(p, face, gt);
    const Vec3 r_gt = world_face_normal(face, gt);
    const double residual = (d * n - f * r_gt).norm();
    return std::min(1.0, std::exp(-residual / k2));
}

RecoveredBox recover_box(const FacePlanes& planes) {
    Mat3 axes_raw;       // columns: averaged directions per axis
    Vec3 extents;
    Vec3 mid_offsets;
    for (int a = 0; a < 3; ++a) {
        const auto pos_it = planes.find(face_from_axis(a, true));
        const auto neg_it = planes.find(face_from_axis(a, false));
        if (pos_it == planes.end() || neg_it == planes.end())
            throw InvalidArgument("recover_box: missing face plane");
        const PlaneParams& pos = pos_it->second;
        const PlaneParams& neg = neg_it->second;

        const double anti_angle = angle_between(pos.N, -neg.N);
        if (anti_angle > tol::kAntiparallelFacesDeg * std::numbers::pi / 180.0)
            throw DegenerateInput("recover_box: opposite-face normals not anti-parallel");

        const Vec3 u = (pos.N - neg.N).normalized();
        // Offsets of both planes re-expressed along the common direction.
        const double d_pos = pos.D * u.dot(pos.N);
        const double d_neg = neg.D * u.dot(neg.N);
        extents[a] = std::abs(d_pos - d_neg);
        mid_offsets[a] = 0.5 * (d_pos + d_neg);
        axes_raw.col(a) = u;
    }

    if (std::abs(axes_raw.determinant()) < 1e-6)
        throw DegenerateInput("recover_box: mid-planes are near-parallel");
    const Vec3 center = axes_raw.transpose().colPivHouseholderQr().solve(mid_offsets);

    // Nearest rotation to the averaged directions.
    Eigen::JacobiSVD<Mat3> svd(axes_raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u_mat = svd.matrixU();
    const Mat3 v_mat = svd.matrixV();
    if ((u_mat * v_mat.transpose()).determinant() < 0.0) u_mat.col(2) *= -1.0;

    RecoveredBox box;
    box.center = center;
    box.extents = extents;
    box.axes = u_mat * v_mat.transpose();
    return box;
}

}  // namespace geopose
