#pragma once

#include <numbers>

#include "geopose/core.hpp"

// Symmetry-aware reconstruction targets: maps the observed cloud through
// the ground-truth canonical frame, applies the category symmetry there,
// and returns it under the predicted pose.

namespace geopose {

struct RotationalSearchParams {
    double grid_step_rad = std::numbers::pi / 180.0;  // 1 degree
    int refine_iterations = 60;
};

// none:       gt-canonical round trip (target is P itself when pred == gt).
// reflection: reflect across the canonical plane between the two trips.
// rotational: rotate about the canonical axis by the angle minimizing the
//             mean L1 distance to the prediction's canonical view (grid
//             search plus golden-section refinement).
PointCloud symmetry_map(const PointCloud& cloud, const Pose& pred, const Pose& gt,
                        const SymmetrySpec& sym,
                        const RotationalSearchParams& search = RotationalSearchParams{});

// lambda2 * mean over points of the L1 distance between the reconstruction
// and the symmetry_map target.
double symmetry_reconstruction_loss(const PointCloud& reconstruction, const PointCloud& cloud,
                                    const Pose& pred, const Pose& gt, const SymmetrySpec& sym,
                                    double lambda2,
                                    const RotationalSearchParams& search = RotationalSearchParams{});

}  // namespace geopose
