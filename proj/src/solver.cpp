#include "geopose/solver.hpp"

#include <cmath>

#include "geopose/rotation_recovery.hpp"

namespace geopose {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// |x| or its Huber-smoothed version (quadratic inside delta).
double smooth_abs(double x, double delta) {
    if (delta <= 0.0) return std::abs(x);
    const double ax = std::abs(x);
    return ax <= delta ? x * x / (2.0 * delta) : ax - delta / 2.0;
}

double smooth_abs_grad(double x, double delta) {
    if (delta <= 0.0) return sgn(x);
    return std::abs(x) <= delta ? x / delta : sgn(x);
}

struct Objective {
    const PointCloud* cloud;
    const FacePlanes* planes;
    const RefineConfig* config;

    LossBreakdown evaluate(const Pose& pose, const FaceSelection& selection) const {
        LossBreakdown terms;
        const LossWeights& w = config->weights;
        const double delta = config->huber_delta;
        if (w.pc > 0.0 && w.l4 > 0.0) terms.pc_rt = pc_rt(pose, delta);
        if (w.pc > 0.0 && w.l5 > 0.0)
            terms.pc_s = pc_size_loss_with_selection(*cloud, selection, pose, config->score);
        if (w.bb > 0.0) {
            const BbPoseTerms bb = bb_terms(pose, delta);
            terms.bb_r = bb.bb_r;
            terms.bb_t = bb.bb_t;
            terms.bb_s = bb.bb_s;
        }
        terms.total = weighted_total(terms, w);
        return terms;
    }

    PoseTangent gradient(const Pose& pose, const FaceSelection& selection) const {
        const LossWeights& w = config->weights;
        const double delta = config->huber_delta;
        PoseTangent g;
        if (w.pc > 0.0 && w.l4 > 0.0) g += pc_rt_grad(pose, delta).scaled(w.pc * w.l4);
        if (w.pc > 0.0 && w.l5 > 0.0)
            g += pc_size_loss_grad_with_selection(*cloud, selection, pose, config->score)
                     .scaled(w.pc * w.l5);
        if (w.bb > 0.0) {
            const BbPoseGrads bb = bb_grads(pose, delta);
            g += bb.bb_r.scaled(w.bb * w.l6);
            g += bb.bb_t.scaled(w.bb * w.l7);
            g += bb.bb_s.scaled(w.bb * w.l8);
        }
        return g;
    }

  private:
    // Huberized twins of the public losses; delta == 0 reduces to them.
    double pc_rt(const Pose& pose, double delta) const {
        if (delta <= 0.0) return pc_pose_loss(*cloud, pose);
        const Mat3 rt = pose.rotation().transpose();
        double sum = 0.0;
        for (std::size_t i = 0; i < cloud->size(); ++i) {
            const Vec3 u = rt * (cloud->points()[i] - pose.translation()) - cloud->canonical()[i];
            for (int k = 0; k < 3; ++k) sum += smooth_abs(u[k], delta);
        }
        return sum;
    }

    PoseTangent pc_rt_grad(const Pose& pose, double delta) const {
        if (delta <= 0.0) return pc_pose_loss_grad(*cloud, pose);
        const Mat3& R = pose.rotation();
        const Mat3 rt = R.transpose();
        PoseTangent g;
        for (std::size_t i = 0; i < cloud->size(); ++i) {
            const Vec3 v = cloud->points()[i] - pose.translation();
            const Vec3 u = rt * v - cloud->canonical()[i];
            const Vec3 du(smooth_abs_grad(u.x(), delta), smooth_abs_grad(u.y(), delta),
                          smooth_abs_grad(u.z(), delta));
            const Vec3 world = R * du;
            g.trans -= world;
            g.rot -= v.cross(world);
        }
        return g;
    }

    BbPoseTerms bb_terms(const Pose& pose, double delta) const {
        if (delta <= 0.0) return bb_pose_loss(pose, *planes);
        BbPoseTerms out;
        const Vec3& t = pose.translation();
        for (int a = 0; a < 3; ++a) {
            const PlaneParams& pos = planes->at(face_from_axis(a, true));
            const PlaneParams& neg = planes->at(face_from_axis(a, false));
            out.bb_t += smooth_abs(
                std::abs(pos.signed_distance(t)) - std::abs(neg.signed_distance(t)), delta);
        }
        for (FaceId f : kAllFaces) {
            const PlaneParams& plane = planes->at(f);
            out.bb_s += smooth_abs(
                pose.size()[face_axis(f)] / 2.0 - std::abs(plane.signed_distance(t)), delta);
        }
        for (int k = 0; k < 3; ++k) {
            out.bb_r += smooth_abs(pose.rotation().col(1)[k] - planes->at(FaceId::y_pos).N[k],
                                   delta);
            out.bb_r += smooth_abs(pose.rotation().col(0)[k] - planes->at(FaceId::x_pos).N[k],
                                   delta);
        }
        return out;
    }

    BbPoseGrads bb_grads(const Pose& pose, double delta) const {
        if (delta <= 0.0) return bb_pose_loss_grad(pose, *planes);
        BbPoseGrads g;
        const Vec3& t = pose.translation();
        for (int a = 0; a < 3; ++a) {
            const PlaneParams& pos = planes->at(face_from_axis(a, true));
            const PlaneParams& neg = planes->at(face_from_axis(a, false));
            const double gp = pos.signed_distance(t);
            const double gn = neg.signed_distance(t);
            const double outer = smooth_abs_grad(std::abs(gp) - std::abs(gn), delta);
            g.bb_t.trans += outer * (sgn(gp) * pos.N - sgn(gn) * neg.N);
        }
        for (FaceId f : kAllFaces) {
            const PlaneParams& plane = planes->at(f);
            const int a = face_axis(f);
            const double gd = plane.signed_distance(t);
            const double outer = smooth_abs_grad(pose.size()[a] / 2.0 - std::abs(gd), delta);
            g.bb_s.size[a] += outer * 0.5;
            g.bb_s.trans += outer * (-sgn(gd)) * plane.N;
        }
        Vec3 gx, gy;
        for (int k = 0; k < 3; ++k) {
            gx[k] = smooth_abs_grad(pose.rotation().col(0)[k] - planes->at(FaceId::x_pos).N[k],
                                    delta);
            gy[k] = smooth_abs_grad(pose.rotation().col(1)[k] - planes->at(FaceId::y_pos).N[k],
                                    delta);
        }
        g.bb_r.rot = pose.rotation().col(0).cross(gx) + pose.rotation().col(1).cross(gy);
        return g;
    }
};

}  // namespace

Pose recover_pose(const PredictionBundle& bundle, const PointCloud& cloud,
                  const CategoryPrior& prior) {
    const CalibrationResult cal = calibrate(bundle.rotation);
    const Vec3 t = assemble_translation(bundle.t_residual, cloud);
    const Vec3 s = assemble_size(bundle.s_residual, prior);
    return Pose(cal.R, t, s);
}

FacePlanes fit_face_planes(const PredictionBundle& bundle, const PointCloud& cloud) {
    FacePlanes planes;
    for (FaceId face : kAllFaces) {
        const std::vector<Vec3> projected = project_votes(cloud, bundle.votes, face);
        const auto& fv = bundle.votes.face(face);

        Vec3 hint = Vec3::Zero();
        for (std::size_t j = 0; j < fv.directions.size(); ++j)
            hint += fv.confidences[j] * fv.directions[j];

        planes.emplace(face, fit_plane_weighted(projected, fv.confidences,
                                                hint.norm() > tol::kUnitNorm
                                                    ? std::optional<Vec3>(hint)
                                                    : std::nullopt));
    }
    return planes;
}

RecoveredBox recover_box_from_votes(const PredictionBundle& bundle, const PointCloud& cloud) {
    return recover_box(fit_face_planes(bundle, cloud));
}

LossWeights RefineConfig::refine_default_weights() {
    LossWeights w;
    w.basic = 0.0;
    w.l5 = 0.0;
    return w;
}

RefineResult refine_pose(const Pose& init, const PointCloud& cloud, const FacePlanes& planes,
                         const RefineConfig& config, const std::set<FaceId>& visible) {
    if (config.iterations < 0) throw InvalidArgument("refine_pose: negative iteration count");
    config.weights.validate();
    config.score.validate();
    if ((config.weights.pc > 0.0 && config.weights.l4 > 0.0) && !cloud.has_canonical())
        throw InvalidArgument("refine_pose: cloud lacks canonical correspondences");

    Objective objective{&cloud, &planes, &config};

    const bool use_size_term = config.weights.pc > 0.0 && config.weights.l5 > 0.0;
    FaceSelection selection;
    if (use_size_term)
        selection = make_face_selection(cloud, init, visible, config.score, config.bin_cap,
                                        config.bin_seed);

    RefineResult result{init, {}};
    LossBreakdown current = objective.evaluate(init, selection);
    if (!std::isfinite(current.total))
        throw DegenerateInput("refine_pose: non-finite loss at the initial pose");
    result.trace.push_back(current);

    Pose pose = init;
    Pose best_pose = init;
    double best_total = current.total;

    for (int it = 0; it < config.iterations; ++it) {
        const PoseTangent g = objective.gradient(pose, selection);

        // Normalized per-block descent direction scaled by the step sizes.
        PoseTangent step;
        if (g.rot.norm() > 0.0) step.rot = -config.rot_step * g.rot.normalized();
        if (g.trans.norm() > 0.0) step.trans = -config.trans_step * g.trans.normalized();
        if (g.size.norm() > 0.0) step.size = -config.size_step * g.size.normalized();
        if (step.rot.isZero() && step.trans.isZero() && step.size.isZero()) break;

        bool accepted = false;
        double scale = 1.0;
        const int tries = config.backtracking ? config.max_halvings : 1;
        for (int attempt = 0; attempt < tries; ++attempt, scale *= 0.5) {
            Pose candidate = pose;
            try {
                candidate = retract(pose, step.scaled(scale));
            } catch (const InvalidArgument&) {
                continue;  // stepped onto non-positive size
            }
            const LossBreakdown trial = objective.evaluate(candidate, selection);
            if (!std::isfinite(trial.total))
                throw DegenerateInput("refine_pose: non-finite loss during descent");
            if (!config.backtracking || trial.total < current.total) {
                pose = candidate;
                current = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;

        result.trace.push_back(current);
        if (current.total < best_total) {
            best_total = current.total;
            best_pose = pose;
        }
    }

    result.pose = config.backtracking ? pose : best_pose;
    return result;
}

}  // namespace geopose
