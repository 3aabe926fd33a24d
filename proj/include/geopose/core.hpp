#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Core geometric types shared by every other module.
//
// Conventions (used everywhere, stated once):
//  - Vec3/Mat3 are Eigen double types. Mat3 is serialized row-major
//    (nine numbers, rows first) regardless of Eigen's internal layout.
//  - A Pose {R, t, s} maps object (canonical) coordinates to camera
//    coordinates: p_cam = R * p_obj + t. s holds the full metric extents
//    of the object bounding box in meters, per canonical axis.
//  - Lengths are meters, angles radians.

namespace geopose {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Geometrically unusable input (parallel normals, collinear fits, ...).
struct DegenerateInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Central tolerance table; tests reference these same constants.
namespace tol {
inline constexpr double kUnitNorm = 1e-12;        // unit-vector check
inline constexpr double kOrthonormal = 1e-9;      // ||R^T R - I||_inf
inline constexpr double kDeterminant = 1e-6;      // |det(R) - 1|
inline constexpr double kParallelNormals = 1e-9;  // 1 - |rx . ry| below this is degenerate
inline constexpr double kMinEffectiveWeight = 1e-6;
inline constexpr double kAntiparallelFacesDeg = 10.0;
}  // namespace tol

bool is_finite(const Vec3& v);
bool is_finite(const Mat3& m);
void require_finite(const Vec3& v, const std::string& what);
void require_finite(const Mat3& m, const std::string& what);

// Checks orthonormality and det(R)=+1 against the tolerance table.
bool is_rotation(const Mat3& R);

Mat3 skew(const Vec3& v);

// Rotation matrix about a unit axis (Rodrigues matrix form).
Mat3 rotation_about_axis(const Vec3& axis, double angle);

// Rigid transform + metric size of one object instance.
class Pose {
  public:
    Pose(const Mat3& R, const Vec3& t, const Vec3& s);

    const Mat3& rotation() const { return R_; }
    const Vec3& translation() const { return t_; }
    const Vec3& size() const { return s_; }

    // Camera -> canonical: R^T (p - t).
    Vec3 to_canonical(const Vec3& p_cam) const { return R_.transpose() * (p_cam - t_); }
    Vec3 to_camera(const Vec3& p_obj) const { return R_ * p_obj + t_; }

    static Pose identity(const Vec3& s) { return Pose(Mat3::Identity(), Vec3::Zero(), s); }

  private:
    Mat3 R_;
    Vec3 t_;
    Vec3 s_;
};

// Two predicted bounding-box plane normals with scalar confidences.
// Normals are normalized on construction; confidences live in [0, 1]
// (0 means "ignore this normal entirely" in calibration).
class RotationPrediction {
  public:
    RotationPrediction(const Vec3& r_x, const Vec3& r_y, double c_x, double c_y);

    const Vec3& r_x() const { return r_x_; }
    const Vec3& r_y() const { return r_y_; }
    double c_x() const { return c_x_; }
    double c_y() const { return c_y_; }

  private:
    Vec3 r_x_;
    Vec3 r_y_;
    double c_x_;
    double c_y_;
};

enum class SymmetryKind { none, reflection, rotational };

// Symmetry of the canonical model: a mirror plane through the origin
// (reflection) or a rotation axis (rotational), both given by a unit
// vector in the canonical frame.
struct SymmetrySpec {
    SymmetryKind kind = SymmetryKind::none;
    Vec3 axis = Vec3::UnitY();  // plane normal for reflection, axis for rotational

    static SymmetrySpec none() { return {SymmetryKind::none, Vec3::UnitY()}; }
    static SymmetrySpec reflection(const Vec3& plane_normal);
    static SymmetrySpec rotational(const Vec3& axis);
};

class CategoryPrior {
  public:
    CategoryPrior(const Vec3& mean_size, const SymmetrySpec& symmetry);

    const Vec3& mean_size() const { return mean_size_; }
    const SymmetrySpec& symmetry() const { return symmetry_; }

  private:
    Vec3 mean_size_;
    SymmetrySpec symmetry_;
};

// Ordered camera-frame points, optionally paired with their ground-truth
// canonical correspondences (same index order).
class PointCloud {
  public:
    explicit PointCloud(std::vector<Vec3> points);
    PointCloud(std::vector<Vec3> points, std::vector<Vec3> canonical);

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }
    bool has_canonical() const { return canonical_.has_value(); }
    const std::vector<Vec3>& canonical() const;

  private:
    std::vector<Vec3> points_;
    std::optional<std::vector<Vec3>> canonical_;
};

// Rotates v by `angle` about a unit axis. Throws on a non-unit axis.
Vec3 rodrigues_rotate(const Vec3& v, const Vec3& axis, double angle);

// Angle in [0, pi]; atan2 of cross/dot, stable near 0 and pi.
double angle_between(const Vec3& a, const Vec3& b);

Vec3 point_cloud_mean(const PointCloud& cloud);

}  // namespace geopose
