#include "geopose/symmetry.hpp"

#include <cmath>
#include <numbers>

namespace geopose {

namespace {

std::vector<Vec3> to_canonical(const PointCloud& cloud, const Pose& pose) {
    std::vector<Vec3> out;
    out.reserve(cloud.size());
    for (const auto& p : cloud.points()) out.push_back(pose.to_canonical(p));
    return out;
}

double mean_l1_after_rotation(const std::vector<Vec3>& q_gt, const std::vector<Vec3>& q_pred,
                              const Vec3& axis, double angle) {
    const Mat3 rot = rotation_about_axis(axis, angle);
    double sum = 0.0;
    for (std::size_t i = 0; i < q_gt.size(); ++i)
        sum += (rot * q_gt[i] - q_pred[i]).lpNorm<1>();
    return sum / static_cast<double>(q_gt.size());
}

// Angle about the symmetry axis that best aligns the gt-canonical points
// with the prediction's canonical view.
double best_axis_angle(const std::vector<Vec3>& q_gt, const std::vector<Vec3>& q_pred,
                       const Vec3& axis, const RotationalSearchParams& search) {
    const double two_pi = 2.0 * std::numbers::pi;
    double best_angle = 0.0;
    double best_cost = mean_l1_after_rotation(q_gt, q_pred, axis, 0.0);
    for (double a = search.grid_step_rad; a < two_pi; a += search.grid_step_rad) {
        const double c = mean_l1_after_rotation(q_gt, q_pred, axis, a);
        if (c < best_cost) {
            best_cost = c;
            best_angle = a;
        }
    }

    // Golden-section refinement on the bracketing interval.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = best_angle - search.grid_step_rad;
    double hi = best_angle + search.grid_step_rad;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = mean_l1_after_rotation(q_gt, q_pred, axis, x1);
    double f2 = mean_l1_after_rotation(q_gt, q_pred, axis, x2);
    for (int it = 0; it < search.refine_iterations; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = mean_l1_after_rotation(q_gt, q_pred, axis, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = mean_l1_after_rotation(q_gt, q_pred, axis, x2);
        }
    }
    const double refined = 0.5 * (lo + hi);
    return mean_l1_after_rotation(q_gt, q_pred, axis, refined) < best_cost ? refined : best_angle;
}

}  // namespace

PointCloud symmetry_map(const PointCloud& cloud, const Pose& pred, const Pose& gt,
                        const SymmetrySpec& sym, const RotationalSearchParams& search) {
    std::vector<Vec3> canonical = to_canonical(cloud, gt);

    switch (sym.kind) {
        case SymmetryKind::none:
            break;
        case SymmetryKind::reflection: {
            const Vec3& m = sym.axis;
            for (auto& q : canonical) q -= 2.0 * q.dot(m) * m;
            break;
        }
        case SymmetryKind::rotational: {
            if (search.grid_step_rad <= 0.0)
                throw InvalidArgument("symmetry_map: grid step must be positive");
            const std::vector<Vec3> q_pred = to_canonical(cloud, pred);
            const double angle = best_axis_angle(canonical, q_pred, sym.axis, search);
            const Mat3 rot = rotation_about_axis(sym.axis, angle);
            for (auto& q : canonical) q = rot * q;
            break;
        }
    }

    std::vector<Vec3> out;
    out.reserve(canonical.size());
    for (const auto& q : canonical) out.push_back(pred.to_camera(q));
    return PointCloud(std::move(out));
}

double symmetry_reconstruction_loss(const PointCloud& reconstruction, const PointCloud& cloud,
                                    const Pose& pred, const Pose& gt, const SymmetrySpec& sym,
                                    double lambda2, const RotationalSearchParams& search) {
    if (reconstruction.size() != cloud.size())
        throw InvalidArgument("symmetry_reconstruction_loss: size mismatch");
    const PointCloud target = symmetry_map(cloud, pred, gt, sym, search);
    double sum = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        sum += (reconstruction.points()[i] - target.points()[i]).lpNorm<1>();
    return lambda2 * sum / static_cast<double>(cloud.size());
}

}  // namespace geopose
