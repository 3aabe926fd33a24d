#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "geopose/core.hpp"

// Evaluation metrics: symmetry-aware rotation error, n-degree/m-cm pose
// accuracy and Monte-Carlo 3D IoU between oriented boxes.

namespace geopose {

// Geodesic angle of R_pred^T R_gt in degrees. Rotational symmetry
// minimizes over spins about the canonical axis (closed form); reflection
// takes the minimum over the identity and the mirror conjugate.
double rotation_error_deg(const Mat3& R_pred, const Mat3& R_gt, const SymmetrySpec& sym);

// Ground-truth pose spun about its symmetry axis to best match the
// prediction; identity for non-rotational categories.
Pose align_symmetric_gt(const Pose& pred, const Pose& gt, const SymmetrySpec& sym);

struct PosePair {
    Pose pred;
    Pose gt;
    SymmetrySpec symmetry;
};

// Fraction of pairs with rotation error < deg_thresh AND translation
// error < cm_thresh (thresholds in degrees / centimeters).
double pose_accuracy(std::span<const PosePair> pairs, double deg_thresh, double cm_thresh);

struct IouEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Monte-Carlo IoU of the two oriented boxes (pose translation = center,
// rotation = axes, size = extents). Samples are drawn in box_a's local
// frame so the estimate is invariant under a common rigid transform.
IouEstimate iou_3d(const Pose& box_a, const Pose& box_b, std::int64_t samples,
                   std::uint64_t seed);

// Fraction of pairs whose (symmetry-aligned) IoU reaches the threshold.
double iou_precision(std::span<const PosePair> pairs, double threshold, std::int64_t samples,
                     std::uint64_t seed);

}  // namespace geopose
