#include "geopose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geopose/rng.hpp"

namespace geopose {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double rotation_angle(const Mat3& Q) {
    const Vec3 axis_vec(Q(2, 1) - Q(1, 2), Q(0, 2) - Q(2, 0), Q(1, 0) - Q(0, 1));
    return std::atan2(0.5 * axis_vec.norm(), 0.5 * (Q.trace() - 1.0));
}

// Smallest geodesic angle of Q * Rot(axis, phi) over phi: the trace of the
// product is a single harmonic in phi, maximized at atan2(b, a). The angle
// is then read off the spun matrix in atan2 form, which stays accurate
// near zero where acos of the trace loses digits.
double min_angle_over_axis_spin(const Mat3& Q, const Vec3& axis) {
    const double c = axis.transpose() * Q * axis;
    const double a = Q.trace() - c;
    const double b = (Q * skew(axis)).trace();
    const double best_phi = std::atan2(b, a);
    return rotation_angle(Q * rotation_about_axis(axis, best_phi));
}

}  // namespace

double rotation_error_deg(const Mat3& R_pred, const Mat3& R_gt, const SymmetrySpec& sym) {
    if (!is_rotation(R_pred) || !is_rotation(R_gt))
        throw InvalidArgument("rotation_error: inputs must be rotations");
    const Mat3 Q = R_pred.transpose() * R_gt;
    switch (sym.kind) {
        case SymmetryKind::none:
            return rotation_angle(Q) * kRadToDeg;
        case SymmetryKind::rotational:
            return min_angle_over_axis_spin(Q, sym.axis) * kRadToDeg;
        case SymmetryKind::reflection: {
            const Mat3 S = Mat3::Identity() - 2.0 * (sym.axis * sym.axis.transpose());
            return std::min(rotation_angle(Q), rotation_angle(S * Q * S)) * kRadToDeg;
        }
    }
    throw InvalidArgument("rotation_error: bad symmetry kind");
}

Pose align_symmetric_gt(const Pose& pred, const Pose& gt, const SymmetrySpec& sym) {
    if (sym.kind != SymmetryKind::rotational) return gt;
    const Mat3 Q = pred.rotation().transpose() * gt.rotation();
    const Vec3& u = sym.axis;
    const double c = u.transpose() * Q * u;
    const double a = Q.trace() - c;
    const double b = (Q * skew(u)).trace();
    const double phi = std::atan2(b, a);  // maximizer of a cos + b sin
    return Pose(gt.rotation() * rotation_about_axis(u, phi), gt.translation(), gt.size());
}

double pose_accuracy(std::span<const PosePair> pairs, double deg_thresh, double cm_thresh) {
    if (pairs.empty()) throw InvalidArgument("pose_accuracy: empty pair list");
    std::size_t hits = 0;
    for (const PosePair& pair : pairs) {
        const double rot_err = rotation_error_deg(pair.pred.rotation(), pair.gt.rotation(),
                                                  pair.symmetry);
        const double trans_err_cm =
            (pair.pred.translation() - pair.gt.translation()).norm() * 100.0;
        if (rot_err < deg_thresh && trans_err_cm < cm_thresh) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

IouEstimate iou_3d(const Pose& box_a, const Pose& box_b, std::int64_t samples,
                   std::uint64_t seed) {
    if (samples <= 0) throw InvalidArgument("iou_3d: samples must be positive");
    const double vol_a = box_a.size().prod();
    const double vol_b = box_b.size().prod();

    Rng rng(seed);
    const Vec3 half_a = box_a.size() / 2.0;
    const Vec3 half_b = box_b.size() / 2.0;
    std::int64_t inside = 0;
    for (std::int64_t i = 0; i < samples; ++i) {
        const Vec3 local(rng.uniform(-half_a.x(), half_a.x()),
                         rng.uniform(-half_a.y(), half_a.y()),
                         rng.uniform(-half_a.z(), half_a.z()));
        const Vec3 world = box_a.to_camera(local);
        const Vec3 in_b = box_b.to_canonical(world);
        if ((in_b.cwiseAbs().array() <= half_b.array()).all()) ++inside;
    }

    const double frac = static_cast<double>(inside) / static_cast<double>(samples);
    const double inter = frac * vol_a;
    const double uni = vol_a + vol_b - inter;
    IouEstimate est;
    est.value = uni > 0.0 ? inter / uni : 0.0;
    const double frac_se = std::sqrt(std::max(frac * (1.0 - frac), 0.0) /
                                     static_cast<double>(samples));
    const double inter_se = frac_se * vol_a;
    est.std_error = uni > 0.0 ? inter_se * (vol_a + vol_b) / (uni * uni) : 0.0;
    return est;
}

double iou_precision(std::span<const PosePair> pairs, double threshold, std::int64_t samples,
                     std::uint64_t seed) {
    if (pairs.empty()) throw InvalidArgument("iou_precision: empty pair list");
    std::size_t hits = 0;
    std::uint64_t k = 0;
    for (const PosePair& pair : pairs) {
        const Pose gt = align_symmetric_gt(pair.pred, pair.gt, pair.symmetry);
        if (iou_3d(pair.pred, gt, samples, mix_seed(seed, k++)).value >= threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

}  // namespace geopose
