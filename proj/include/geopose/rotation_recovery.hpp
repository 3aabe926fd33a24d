#pragma once

#include "geopose/core.hpp"

// Confidence-aware calibration of two predicted bounding-box plane
// normals into an orthonormal rotation, plus translation/size assembly.

namespace geopose {

struct CalibrationResult {
    Vec3 r_x_cal;   // unit, orthogonal to r_y_cal
    Vec3 r_y_cal;
    double theta1;  // signed correction assigned to r_y
    double theta2;  // signed correction assigned to r_x
    Mat3 R;         // columns [r_x_cal, r_y_cal, r_x_cal x r_y_cal]
};

// Splits the angular excess theta - pi/2 between the two normals in
// inverse proportion to their confidences:
//   theta1 = c_x/(c_x+c_y) * (theta - pi/2)   applied to r_y
//   theta2 = c_y/(c_x+c_y) * (theta - pi/2)   applied to r_x
// Both corrections rotate about the unit axis a = rx x ry / |rx x ry|,
// signed so the calibrated pair is exactly perpendicular.
CalibrationResult calibrate(const RotationPrediction& pred);

// Target confidence for a predicted normal: exp(-k1 |r - r_gt|^2).
double rotation_confidence_target(const Vec3& r, const Vec3& r_gt, double k1);

// t = t_residual + mean(P)
Vec3 assemble_translation(const Vec3& t_residual, const PointCloud& cloud);

// s = s_residual + category mean size; rejects non-positive results.
Vec3 assemble_size(const Vec3& s_residual, const CategoryPrior& prior);

}  // namespace geopose
