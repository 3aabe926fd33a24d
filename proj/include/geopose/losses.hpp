#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "geopose/bbox_voting.hpp"
#include "geopose/core.hpp"
#include "geopose/symmetry.hpp"

// Geometric consistency losses between pose, point cloud and the voted
// bounding box, with analytic pose-parameter gradients and a central
// finite-difference checker.

namespace geopose {

struct SizeScoreParams {
    double k_s = 10.0;
    double k_n = 0.5;
    double k_p = 1.0;
    int bin_count = 64;

    void validate() const;
};

// The printed form of the size score caps the product at zero, which
// makes |1 - f(s)| >= 1 everywhere; `clamp` reads it as a [0,1] clamp so
// well-supported sizes cost nothing. `raw_paper` keeps the printed form.
enum class SizeScoreMode { clamp, raw_paper };

struct LossWeights {
    double l1 = 1.0 / 8.0;  // rotation-confidence term
    double l2 = 1.0 / 8.0;  // symmetry-aware reconstruction
    double l3 = 1.0 / 8.0;  // vote-confidence term
    double l4 = 1.0;        // point-cloud pose term
    double l5 = 1.0;        // point-cloud size term
    double l6 = 1.0;        // box-pose rotation term
    double l7 = 1.0;        // box-pose translation term
    double l8 = 1.0;        // box-pose size term
    double basic = 8.0;
    double bb = 1.0;
    double pc = 1.0;

    void validate() const;
};

// Unweighted per-term values; `total` carries the weighted sum.
struct LossBreakdown {
    double basic_rot_conf = 0.0;
    double basic_sym = 0.0;
    double basic_vote_conf = 0.0;
    double pc_rt = 0.0;
    double pc_s = 0.0;
    double bb_r = 0.0;
    double bb_t = 0.0;
    double bb_s = 0.0;
    double total = 0.0;
};

double weighted_total(const LossBreakdown& terms, const LossWeights& w);

// --- point cloud <-> pose -------------------------------------------------

// sum_p |R^T (p - t) - p_canonical|_1; requires canonical correspondences.
double pc_pose_loss(const PointCloud& cloud, const Pose& pred);

// Canonical-frame coordinate of p along the face axis, signed so the face
// boundary sits at +half_extent.
double axis_coordinate(const Vec3& p, FaceId face, const Pose& pose);

// Histogram-equalized subsample: per bin at most `cap` indices, chosen
// uniformly under `seed`. Indices are returned in ascending order.
std::vector<std::size_t> bin_sample_indices(const PointCloud& cloud, FaceId face, const Pose& pred,
                                            int bins, int cap, std::uint64_t seed);

// Coordinates of the bin-sampled subset along the face axis.
std::vector<double> bin_sample(const PointCloud& cloud, FaceId face, const Pose& pred, int bins,
                               int cap, std::uint64_t seed);

// Probability-style support score for a half-extent candidate s:
//   f(s) = clamp01( k_p/|P| * f_p(s) * f_d(s) )
//   f_p(s) = exp( k_n/|P| * sum (alpha+1) ),  f_d = sum alpha exp(-k_s (s-p)^2)
// with alpha = +1 if p <= s else -1.
double size_score(std::span<const double> coords, double s_half, const SizeScoreParams& params,
                  SizeScoreMode mode = SizeScoreMode::clamp);

// sum over visible positive axes of |1 - f(s_axis/2)|, scaled by lambda5.
double pc_size_loss(const PointCloud& cloud, const Pose& pred, const std::set<FaceId>& visible,
                    const SizeScoreParams& params, double lambda5 = 1.0, int bin_cap = 5,
                    std::uint64_t seed = 0, SizeScoreMode mode = SizeScoreMode::clamp);

using FaceSelection = std::map<FaceId, std::vector<std::size_t>>;

FaceSelection make_face_selection(const PointCloud& cloud, const Pose& pred,
                                  const std::set<FaceId>& visible, const SizeScoreParams& params,
                                  int bin_cap, std::uint64_t seed);

// Same loss restricted to a frozen subsample; the continuous function of
// pose that gradients are defined on (bin membership is piecewise
// constant in the pose).
double pc_size_loss_with_selection(const PointCloud& cloud, const FaceSelection& selection,
                                   const Pose& pred, const SizeScoreParams& params,
                                   double lambda5 = 1.0,
                                   SizeScoreMode mode = SizeScoreMode::clamp);

// --- bounding box <-> pose ------------------------------------------------

struct BbPoseTerms {
    double bb_r = 0.0;
    double bb_t = 0.0;
    double bb_s = 0.0;
};

// bb_t: per axis | |N+.t - D+| - |N-.t - D-| |
// bb_s: per face | s/2 - |N.t - D| |
// bb_r: |r_y - N_{y+}|_1 + |r_x - N_{x+}|_1
BbPoseTerms bb_pose_loss(const Pose& pred, const FacePlanes& planes);

// --- gradients ------------------------------------------------------------

// Tangent-space step: `rot` is an axis-angle increment applied as
// R <- exp([rot]x) R; translation and size move componentwise.
struct PoseTangent {
    Vec3 rot = Vec3::Zero();
    Vec3 trans = Vec3::Zero();
    Vec3 size = Vec3::Zero();

    PoseTangent& operator+=(const PoseTangent& o);
    PoseTangent scaled(double a) const;
};

Pose retract(const Pose& pose, const PoseTangent& step);

PoseTangent pc_pose_loss_grad(const PointCloud& cloud, const Pose& pred);

struct BbPoseGrads {
    PoseTangent bb_r;
    PoseTangent bb_t;
    PoseTangent bb_s;
};

BbPoseGrads bb_pose_loss_grad(const Pose& pred, const FacePlanes& planes);

PoseTangent pc_size_loss_grad_with_selection(const PointCloud& cloud,
                                             const FaceSelection& selection, const Pose& pred,
                                             const SizeScoreParams& params, double lambda5 = 1.0,
                                             SizeScoreMode mode = SizeScoreMode::clamp);

struct GradCheckResult {
    double max_rel_error = 0.0;
    bool nonsmooth = false;
    std::array<double, 9> analytic{};  // rot xyz, trans xyz, size xyz
    std::array<double, 9> numeric{};
    std::array<double, 9> rel_errors{};
};

// Central-difference comparison in the 9-dof pose tangent space. Kinks
// are detected by one-sided slopes that fail to converge toward each
// other as eps shrinks; such points set `nonsmooth` instead of silently
// passing or failing.
GradCheckResult grad_check(const std::function<double(const Pose&)>& loss_fn,
                           const std::function<PoseTangent(const Pose&)>& analytic_grad,
                           const Pose& at, double eps);

// --- total objective --------------------------------------------------------

struct LossParams {
    double k1 = 13.7;
    double k2 = 1.0 / 303.5;
    SizeScoreParams score;
    LossWeights weights;
    int bin_cap = 5;
    std::uint64_t bin_seed = 0;
    SizeScoreMode mode = SizeScoreMode::clamp;
    RotationalSearchParams symmetry_search;
};

// Everything total_loss needs; pointers are non-owning and required.
struct TotalLossInputs {
    const PointCloud* cloud = nullptr;           // with canonical correspondences
    const PointCloud* reconstruction = nullptr;  // predicted reconstruction P'
    const RotationPrediction* rotation = nullptr;
    const FaceVoteSet* votes = nullptr;
    const FacePlanes* planes = nullptr;
    const Pose* pred = nullptr;
    const Pose* gt = nullptr;
    SymmetrySpec symmetry;
    std::set<FaceId> visible;
};

LossBreakdown total_loss(const TotalLossInputs& in, const LossParams& params);

}  // namespace geopose
