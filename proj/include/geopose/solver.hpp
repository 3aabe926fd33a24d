#pragma once

#include <set>
#include <vector>

#include "geopose/bbox_voting.hpp"
#include "geopose/core.hpp"
#include "geopose/losses.hpp"
#include "geopose/synthgen.hpp"

// End-to-end pose recovery: closed-form assembly from a prediction bundle
// and optional local refinement of the geometric consistency terms.

namespace geopose {

// R from normal calibration, t = t_residual + mean(P), s = s_residual + prior.
Pose recover_pose(const PredictionBundle& bundle, const PointCloud& cloud,
                  const CategoryPrior& prior);

// project_votes + confidence-weighted plane fit per face, then box recovery.
RecoveredBox recover_box_from_votes(const PredictionBundle& bundle, const PointCloud& cloud);

// Plane fits for all six faces; weights are the vote confidences and the
// orientation hint is the confidence-weighted mean vote direction.
FacePlanes fit_face_planes(const PredictionBundle& bundle, const PointCloud& cloud);

struct RefineConfig {
    double rot_step = 1e-2;    // radians
    double trans_step = 1e-2;  // meters
    double size_step = 1e-2;   // meters
    int iterations = 50;
    bool backtracking = true;
    int max_halvings = 20;
    double huber_delta = 0.0;  // 0 disables smoothing
    // Refinement weights. The size-score term defaults off: bin
    // re-selection makes it piecewise constant in the pose, which stalls
    // a line search without helping accuracy (bb_s already supervises s).
    LossWeights weights = refine_default_weights();
    SizeScoreParams score;
    int bin_cap = 5;
    std::uint64_t bin_seed = 0;

    static LossWeights refine_default_weights();
};

struct RefineResult {
    Pose pose;
    std::vector<LossBreakdown> trace;  // initial iterate first; basic terms zero
};

// Descends lambda_PC * L_PC + lambda_BB * L_BB over (R, t, s) with
// axis-angle retraction for the rotation block. With backtracking the
// trace totals never increase; in fixed-step mode the best visited pose
// is returned.
RefineResult refine_pose(const Pose& init, const PointCloud& cloud, const FacePlanes& planes,
                         const RefineConfig& config, const std::set<FaceId>& visible = {});

}  // namespace geopose
