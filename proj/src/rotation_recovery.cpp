#include "geopose/rotation_recovery.hpp"

#include <cmath>
#include <numbers>

namespace geopose {

CalibrationResult calibrate(const RotationPrediction& pred) {
    const Vec3& rx = pred.r_x();
    const Vec3& ry = pred.r_y();
    const double cx = pred.c_x();
    const double cy = pred.c_y();
    if (cx + cy <= 0.0) throw InvalidArgument("calibrate: c_x + c_y must be positive");

    const Vec3 cross = rx.cross(ry);
    const double cross_norm = cross.norm();
    if (std::abs(rx.dot(ry)) >= 1.0 - tol::kParallelNormals || cross_norm < tol::kUnitNorm)
        throw DegenerateInput("calibrate: plane normals are (anti)parallel, axis undefined");
    const Vec3 axis = cross / cross_norm;

    const double theta = angle_between(rx, ry);
    const double excess = theta - std::numbers::pi / 2.0;
    const double theta1 = cx / (cx + cy) * excess;
    const double theta2 = cy / (cx + cy) * excess;

    // Measuring in-plane position angles about `axis` (ry sits at +theta
    // from rx), moving ry by -theta1 and rx by +theta2 lands the pair at
    // theta - (theta1 + theta2) = pi/2 apart.
    CalibrationResult out;
    out.theta1 = theta1;
    out.theta2 = theta2;
    out.r_y_cal = rodrigues_rotate(ry, axis, -theta1);
    out.r_x_cal = rodrigues_rotate(rx, axis, theta2);
    if (std::abs(out.r_x_cal.dot(out.r_y_cal)) >= tol::kOrthonormal)
        throw DegenerateInput("calibrate: calibration failed to reach orthogonality");
    out.R.col(0) = out.r_x_cal;
    out.R.col(1) = out.r_y_cal;
    out.R.col(2) = out.r_x_cal.cross(out.r_y_cal);
    return out;
}

double rotation_confidence_target(const Vec3& r, const Vec3& r_gt, double k1) {
    require_finite(r, "rotation_confidence_target.r");
    require_finite(r_gt, "rotation_confidence_target.r_gt");
    return std::exp(-k1 * (r - r_gt).squaredNorm());
}

Vec3 assemble_translation(const Vec3& t_residual, const PointCloud& cloud) {
    require_finite(t_residual, "assemble_translation.t_residual");
    return t_residual + point_cloud_mean(cloud);
}

Vec3 assemble_size(const Vec3& s_residual, const CategoryPrior& prior) {
    require_finite(s_residual, "assemble_size.s_residual");
    const Vec3 s = s_residual + prior.mean_size();
    if ((s.array() <= 0.0).any())
        throw InvalidArgument("assemble_size: resulting size has a non-positive component");
    return s;
}

}  // namespace geopose
