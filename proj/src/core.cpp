#include "geopose/core.hpp"

#include <cmath>

namespace geopose {

bool is_finite(const Vec3& v) { return v.allFinite(); }
bool is_finite(const Mat3& m) { return m.allFinite(); }

void require_finite(const Vec3& v, const std::string& what) {
    if (!v.allFinite()) throw InvalidArgument(what + ": non-finite component");
}

void require_finite(const Mat3& m, const std::string& what) {
    if (!m.allFinite()) throw InvalidArgument(what + ": non-finite component");
}

bool is_rotation(const Mat3& R) {
    if (!R.allFinite()) return false;
    const Mat3 err = R.transpose() * R - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() >= tol::kOrthonormal) return false;
    return std::abs(R.determinant() - 1.0) <= tol::kDeterminant;
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return m;
}

Mat3 rotation_about_axis(const Vec3& axis, double angle) {
    if (std::abs(axis.norm() - 1.0) > tol::kOrthonormal)
        throw InvalidArgument("rotation_about_axis: axis must be unit length");
    const Mat3 k = skew(axis);
    return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

Pose::Pose(const Mat3& R, const Vec3& t, const Vec3& s) : R_(R), t_(t), s_(s) {
    require_finite(R, "Pose.R");
    require_finite(t, "Pose.t");
    require_finite(s, "Pose.s");
    const Mat3 err = R.transpose() * R - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() >= tol::kOrthonormal)
        throw InvalidArgument("Pose.R: columns not orthonormal");
    if (std::abs(R.determinant() - 1.0) > tol::kDeterminant)
        throw InvalidArgument("Pose.R: determinant not +1");
    if ((s.array() <= 0.0).any()) throw InvalidArgument("Pose.s: extents must be positive");
}

RotationPrediction::RotationPrediction(const Vec3& r_x, const Vec3& r_y, double c_x, double c_y)
    : c_x_(c_x), c_y_(c_y) {
    require_finite(r_x, "RotationPrediction.r_x");
    require_finite(r_y, "RotationPrediction.r_y");
    const double nx = r_x.norm();
    const double ny = r_y.norm();
    if (nx < tol::kUnitNorm || ny < tol::kUnitNorm)
        throw InvalidArgument("RotationPrediction: zero-length normal");
    r_x_ = r_x / nx;
    r_y_ = r_y / ny;
    if (std::abs(r_x_.dot(r_y_)) >= 1.0 - tol::kParallelNormals)
        throw InvalidArgument("RotationPrediction: plane normals are (anti)parallel");
    if (!std::isfinite(c_x) || !std::isfinite(c_y) || c_x < 0.0 || c_x > 1.0 || c_y < 0.0 ||
        c_y > 1.0)
        throw InvalidArgument("RotationPrediction: confidences must lie in [0, 1]");
}

SymmetrySpec SymmetrySpec::reflection(const Vec3& plane_normal) {
    require_finite(plane_normal, "SymmetrySpec.plane_normal");
    const double n = plane_normal.norm();
    if (n < tol::kUnitNorm) throw InvalidArgument("SymmetrySpec: zero plane normal");
    return {SymmetryKind::reflection, plane_normal / n};
}

SymmetrySpec SymmetrySpec::rotational(const Vec3& axis) {
    require_finite(axis, "SymmetrySpec.axis");
    const double n = axis.norm();
    if (n < tol::kUnitNorm) throw InvalidArgument("SymmetrySpec: zero axis");
    return {SymmetryKind::rotational, axis / n};
}

CategoryPrior::CategoryPrior(const Vec3& mean_size, const SymmetrySpec& symmetry)
    : mean_size_(mean_size), symmetry_(symmetry) {
    require_finite(mean_size, "CategoryPrior.mean_size");
    if ((mean_size.array() <= 0.0).any())
        throw InvalidArgument("CategoryPrior.mean_size: must be positive");
}

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) throw InvalidArgument("PointCloud: empty");
    for (const auto& p : points_) require_finite(p, "PointCloud.point");
}

PointCloud::PointCloud(std::vector<Vec3> points, std::vector<Vec3> canonical)
    : points_(std::move(points)), canonical_(std::move(canonical)) {
    if (points_.empty()) throw InvalidArgument("PointCloud: empty");
    if (canonical_->size() != points_.size())
        throw InvalidArgument("PointCloud: canonical correspondence count mismatch");
    for (const auto& p : points_) require_finite(p, "PointCloud.point");
    for (const auto& p : *canonical_) require_finite(p, "PointCloud.canonical");
}

const std::vector<Vec3>& PointCloud::canonical() const {
    if (!canonical_) throw InvalidArgument("PointCloud: no canonical correspondences attached");
    return *canonical_;
}

Vec3 rodrigues_rotate(const Vec3& v, const Vec3& axis, double angle) {
    require_finite(v, "rodrigues_rotate.v");
    require_finite(axis, "rodrigues_rotate.axis");
    if (std::abs(axis.norm() - 1.0) > tol::kOrthonormal)
        throw InvalidArgument("rodrigues_rotate: axis must be unit length");
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return v * c + axis.cross(v) * s + axis * (axis.dot(v)) * (1.0 - c);
}

double angle_between(const Vec3& a, const Vec3& b) {
    require_finite(a, "angle_between.a");
    require_finite(b, "angle_between.b");
    if (a.norm() < tol::kUnitNorm || b.norm() < tol::kUnitNorm)
        throw InvalidArgument("angle_between: zero vector");
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

Vec3 point_cloud_mean(const PointCloud& cloud) {
    Vec3 sum = Vec3::Zero();
    for (const auto& p : cloud.points()) sum += p;
    return sum / static_cast<double>(cloud.size());
}

}  // namespace geopose
