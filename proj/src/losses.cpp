#include "geopose/losses.hpp"

#include <algorithm>
#include <cmath>

#include "geopose/rng.hpp"
#include "geopose/rotation_recovery.hpp"

namespace geopose {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Vec3 sign_vec(const Vec3& v) { return Vec3(sgn(v.x()), sgn(v.y()), sgn(v.z())); }

}  // namespace

void SizeScoreParams::validate() const {
    if (k_s <= 0.0 || k_n <= 0.0 || k_p <= 0.0)
        throw InvalidArgument("SizeScoreParams: k_s, k_n, k_p must be positive");
    if (bin_count < 1) throw InvalidArgument("SizeScoreParams: bin_count must be >= 1");
}

void LossWeights::validate() const {
    for (double v : {l1, l2, l3, l4, l5, l6, l7, l8, basic, bb, pc})
        if (!std::isfinite(v) || v < 0.0)
            throw InvalidArgument("LossWeights: weights must be finite and >= 0");
}

double weighted_total(const LossBreakdown& terms, const LossWeights& w) {
    return w.basic * (w.l1 * terms.basic_rot_conf + w.l2 * terms.basic_sym +
                      w.l3 * terms.basic_vote_conf) +
           w.bb * (w.l6 * terms.bb_r + w.l7 * terms.bb_t + w.l8 * terms.bb_s) +
           w.pc * (w.l4 * terms.pc_rt + w.l5 * terms.pc_s);
}

double pc_pose_loss(const PointCloud& cloud, const Pose& pred) {
    if (!cloud.has_canonical())
        throw InvalidArgument("pc_pose_loss: cloud lacks canonical correspondences");
    const Mat3 rt = pred.rotation().transpose();
    double sum = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        sum += (rt * (cloud.points()[i] - pred.translation()) - cloud.canonical()[i]).lpNorm<1>();
    return sum;
}

PoseTangent pc_pose_loss_grad(const PointCloud& cloud, const Pose& pred) {
    if (!cloud.has_canonical())
        throw InvalidArgument("pc_pose_loss_grad: cloud lacks canonical correspondences");
    const Mat3& R = pred.rotation();
    const Mat3 rt = R.transpose();
    PoseTangent g;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 v = cloud.points()[i] - pred.translation();
        const Vec3 u = rt * v - cloud.canonical()[i];
        const Vec3 world_sign = R * sign_vec(u);
        g.trans -= world_sign;
        g.rot -= v.cross(world_sign);
    }
    return g;
}

double axis_coordinate(const Vec3& p, FaceId face, const Pose& pose) {
    return face_sign(face) * pose.to_canonical(p)[face_axis(face)];
}

std::vector<std::size_t> bin_sample_indices(const PointCloud& cloud, FaceId face, const Pose& pred,
                                            int bins, int cap, std::uint64_t seed) {
    if (bins < 1) throw InvalidArgument("bin_sample: bins must be >= 1");
    if (cap < 1) throw InvalidArgument("bin_sample: cap must be >= 1");

    const std::size_t n = cloud.size();
    std::vector<double> coords(n);
    for (std::size_t i = 0; i < n; ++i)
        coords[i] = axis_coordinate(cloud.points()[i], face, pred);

    const auto [lo_it, hi_it] = std::minmax_element(coords.begin(), coords.end());
    const double lo = *lo_it;
    const double span = *hi_it - lo;

    std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(bins));
    for (std::size_t i = 0; i < n; ++i) {
        int b = span > 0.0 ? static_cast<int>((coords[i] - lo) / span * bins) : 0;
        b = std::clamp(b, 0, bins - 1);
        buckets[static_cast<std::size_t>(b)].push_back(i);
    }

    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(face)));
    std::vector<std::size_t> selected;
    selected.reserve(n);
    for (auto& bucket : buckets) {
        if (bucket.size() <= static_cast<std::size_t>(cap)) {
            selected.insert(selected.end(), bucket.begin(), bucket.end());
            continue;
        }
        // Partial Fisher-Yates: draw `cap` without replacement.
        for (std::size_t k = 0; k < static_cast<std::size_t>(cap); ++k) {
            const std::size_t pick = k + rng.index(bucket.size() - k);
            std::swap(bucket[k], bucket[pick]);
        }
        std::sort(bucket.begin(), bucket.begin() + cap);
        selected.insert(selected.end(), bucket.begin(), bucket.begin() + cap);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::vector<double> bin_sample(const PointCloud& cloud, FaceId face, const Pose& pred, int bins,
                               int cap, std::uint64_t seed) {
    const auto idx = bin_sample_indices(cloud, face, pred, bins, cap, seed);
    std::vector<double> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(axis_coordinate(cloud.points()[i], face, pred));
    return out;
}

double size_score(std::span<const double> coords, double s_half, const SizeScoreParams& params,
                  SizeScoreMode mode) {
    params.validate();
    if (coords.empty()) throw InvalidArgument("size_score: empty coordinate set");
    if (!(s_half > 0.0)) throw InvalidArgument("size_score: candidate half-extent must be > 0");

    const double n = static_cast<double>(coords.size());
    double alpha_plus1_sum = 0.0;
    double f_d = 0.0;
    for (double p : coords) {
        const double alpha = p <= s_half ? 1.0 : -1.0;
        alpha_plus1_sum += alpha + 1.0;
        const double d = s_half - p;
        f_d += alpha * std::exp(-params.k_s * d * d);
    }
    const double f_p = std::exp(params.k_n / n * alpha_plus1_sum);
    const double raw = params.k_p / n * f_p * f_d;
    return mode == SizeScoreMode::clamp ? std::clamp(raw, 0.0, 1.0) : std::min(0.0, raw);
}

double pc_size_loss(const PointCloud& cloud, const Pose& pred, const std::set<FaceId>& visible,
                    const SizeScoreParams& params, double lambda5, int bin_cap, std::uint64_t seed,
                    SizeScoreMode mode) {
    double loss = 0.0;
    for (FaceId face : kPositiveFaces) {
        if (!visible.contains(face)) continue;
        const auto coords = bin_sample(cloud, face, pred, params.bin_count, bin_cap, seed);
        const double s_half = pred.size()[face_axis(face)] / 2.0;
        loss += std::abs(1.0 - size_score(coords, s_half, params, mode));
    }
    return lambda5 * loss;
}

FaceSelection make_face_selection(const PointCloud& cloud, const Pose& pred,
                                  const std::set<FaceId>& visible, const SizeScoreParams& params,
                                  int bin_cap, std::uint64_t seed) {
    FaceSelection sel;
    for (FaceId face : kPositiveFaces) {
        if (!visible.contains(face)) continue;
        sel[face] = bin_sample_indices(cloud, face, pred, params.bin_count, bin_cap, seed);
    }
    return sel;
}

double pc_size_loss_with_selection(const PointCloud& cloud, const FaceSelection& selection,
                                   const Pose& pred, const SizeScoreParams& params, double lambda5,
                                   SizeScoreMode mode) {
    double loss = 0.0;
    for (const auto& [face, indices] : selection) {
        std::vector<double> coords;
        coords.reserve(indices.size());
        for (std::size_t i : indices)
            coords.push_back(axis_coordinate(cloud.points()[i], face, pred));
        const double s_half = pred.size()[face_axis(face)] / 2.0;
        loss += std::abs(1.0 - size_score(coords, s_half, params, mode));
    }
    return lambda5 * loss;
}

PoseTangent pc_size_loss_grad_with_selection(const PointCloud& cloud,
                                             const FaceSelection& selection, const Pose& pred,
                                             const SizeScoreParams& params, double lambda5,
                                             SizeScoreMode mode) {
    params.validate();
    PoseTangent g;
    for (const auto& [face, indices] : selection) {
        if (indices.empty()) continue;
        const int axis = face_axis(face);
        const double sigma = face_sign(face);
        const Vec3 r_axis = pred.rotation().col(axis);
        const double s_half = pred.size()[axis] / 2.0;
        const double n = static_cast<double>(indices.size());

        double alpha_plus1_sum = 0.0;
        double f_d = 0.0;
        std::vector<double> coords;
        coords.reserve(indices.size());
        for (std::size_t i : indices) {
            const double c = axis_coordinate(cloud.points()[i], face, pred);
            coords.push_back(c);
            const double alpha = c <= s_half ? 1.0 : -1.0;
            alpha_plus1_sum += alpha + 1.0;
            const double d = s_half - c;
            f_d += alpha * std::exp(-params.k_s * d * d);
        }
        const double f_p = std::exp(params.k_n / n * alpha_plus1_sum);
        const double raw = params.k_p / n * f_p * f_d;
        // Clamp (or the raw-paper cap) is flat outside the open interval.
        if (mode == SizeScoreMode::clamp ? (raw <= 0.0 || raw >= 1.0) : raw >= 0.0) continue;

        const double dl_df = -sgn(1.0 - raw) * lambda5;
        const double common = params.k_p / n * f_p;

        double fd_ds = 0.0;
        for (std::size_t k = 0; k < indices.size(); ++k) {
            const double c = coords[k];
            const double alpha = c <= s_half ? 1.0 : -1.0;
            const double d = s_half - c;
            const double kernel_deriv = -2.0 * params.k_s * d * std::exp(-params.k_s * d * d);
            fd_ds += alpha * kernel_deriv;

            // df/dc mirrors df/ds with opposite sign on the kernel.
            const double df_dc = common * alpha * (-kernel_deriv);
            const Vec3 p = cloud.points()[indices[k]];
            g.trans += dl_df * df_dc * (-sigma * r_axis);
            g.rot += dl_df * df_dc * (sigma * r_axis.cross(p - pred.translation()));
        }
        g.size[axis] += dl_df * common * fd_ds * 0.5;
    }
    return g;
}

BbPoseTerms bb_pose_loss(const Pose& pred, const FacePlanes& planes) {
    for (FaceId f : kAllFaces)
        if (!planes.contains(f)) throw InvalidArgument("bb_pose_loss: missing face plane");

    BbPoseTerms out;
    const Vec3& t = pred.translation();
    for (int a = 0; a < 3; ++a) {
        const PlaneParams& pos = planes.at(face_from_axis(a, true));
        const PlaneParams& neg = planes.at(face_from_axis(a, false));
        out.bb_t += std::abs(std::abs(pos.signed_distance(t)) - std::abs(neg.signed_distance(t)));
    }
    for (FaceId f : kAllFaces) {
        const PlaneParams& plane = planes.at(f);
        const double half = pred.size()[face_axis(f)] / 2.0;
        out.bb_s += std::abs(half - std::abs(plane.signed_distance(t)));
    }
    out.bb_r = (pred.rotation().col(1) - planes.at(FaceId::y_pos).N).lpNorm<1>() +
               (pred.rotation().col(0) - planes.at(FaceId::x_pos).N).lpNorm<1>();
    return out;
}

BbPoseGrads bb_pose_loss_grad(const Pose& pred, const FacePlanes& planes) {
    for (FaceId f : kAllFaces)
        if (!planes.contains(f)) throw InvalidArgument("bb_pose_loss_grad: missing face plane");

    BbPoseGrads g;
    const Vec3& t = pred.translation();

    for (int a = 0; a < 3; ++a) {
        const PlaneParams& pos = planes.at(face_from_axis(a, true));
        const PlaneParams& neg = planes.at(face_from_axis(a, false));
        const double gp = pos.signed_distance(t);
        const double gn = neg.signed_distance(t);
        const double outer = sgn(std::abs(gp) - std::abs(gn));
        g.bb_t.trans += outer * (sgn(gp) * pos.N - sgn(gn) * neg.N);
    }

    for (FaceId f : kAllFaces) {
        const PlaneParams& plane = planes.at(f);
        const int a = face_axis(f);
        const double gd = plane.signed_distance(t);
        const double outer = sgn(pred.size()[a] / 2.0 - std::abs(gd));
        g.bb_s.size[a] += outer * 0.5;
        g.bb_s.trans += outer * (-sgn(gd)) * plane.N;
    }

    const Vec3 gx = sign_vec(pred.rotation().col(0) - planes.at(FaceId::x_pos).N);
    const Vec3 gy = sign_vec(pred.rotation().col(1) - planes.at(FaceId::y_pos).N);
    g.bb_r.rot = pred.rotation().col(0).cross(gx) + pred.rotation().col(1).cross(gy);
    return g;
}

PoseTangent& PoseTangent::operator+=(const PoseTangent& o) {
    rot += o.rot;
    trans += o.trans;
    size += o.size;
    return *this;
}

PoseTangent PoseTangent::scaled(double a) const { return {rot * a, trans * a, size * a}; }

Pose retract(const Pose& pose, const PoseTangent& step) {
    Mat3 R = pose.rotation();
    const double angle = step.rot.norm();
    if (angle > 0.0) R = rotation_about_axis(step.rot / angle, angle) * R;
    return Pose(R, pose.translation() + step.trans, pose.size() + step.size);
}

GradCheckResult grad_check(const std::function<double(const Pose&)>& loss_fn,
                           const std::function<PoseTangent(const Pose&)>& analytic_grad,
                           const Pose& at, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("grad_check: eps must be positive");

    const PoseTangent g = analytic_grad(at);
    const std::array<double, 9> analytic = {g.rot.x(),   g.rot.y(),   g.rot.z(),
                                            g.trans.x(), g.trans.y(), g.trans.z(),
                                            g.size.x(),  g.size.y(),  g.size.z()};

    const double f0 = loss_fn(at);
    GradCheckResult res;
    res.analytic = analytic;

    for (int i = 0; i < 9; ++i) {
        PoseTangent dir;
        if (i < 3)
            dir.rot[i] = 1.0;
        else if (i < 6)
            dir.trans[i - 3] = 1.0;
        else
            dir.size[i - 6] = 1.0;

        const auto one_sided = [&](double h) {
            const double fp = loss_fn(retract(at, dir.scaled(h)));
            const double fm = loss_fn(retract(at, dir.scaled(-h)));
            return std::array<double, 2>{(fp - f0) / h, (f0 - fm) / h};
        };

        const auto [fwd, bwd] = one_sided(eps);
        const auto [fwd_s, bwd_s] = one_sided(eps / 8.0);
        const double central = 0.5 * (fwd + bwd);
        res.numeric[i] = central;

        // One-sided slopes of a smooth function close at O(eps); at a kink
        // the gap stays put as eps shrinks.
        const double gap = std::abs(fwd - bwd);
        const double gap_small = std::abs(fwd_s - bwd_s);
        const double scale = std::abs(fwd) + std::abs(bwd) + 1.0;
        if (gap > 1e-7 * scale && gap_small > 0.5 * gap) res.nonsmooth = true;

        const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(central)});
        res.rel_errors[i] = std::abs(analytic[i] - central) / denom;
        res.max_rel_error = std::max(res.max_rel_error, res.rel_errors[i]);
    }
    return res;
}

LossBreakdown total_loss(const TotalLossInputs& in, const LossParams& params) {
    if (!in.cloud || !in.reconstruction || !in.rotation || !in.votes || !in.planes || !in.pred ||
        !in.gt)
        throw InvalidArgument("total_loss: all inputs are required");
    params.score.validate();
    params.weights.validate();

    LossBreakdown out;
    const Mat3& gt_R = in.gt->rotation();
    out.basic_rot_conf =
        std::abs(in.rotation->c_x() -
                 rotation_confidence_target(in.rotation->r_x(), gt_R.col(0), params.k1)) +
        std::abs(in.rotation->c_y() -
                 rotation_confidence_target(in.rotation->r_y(), gt_R.col(1), params.k1));

    out.basic_sym = symmetry_reconstruction_loss(*in.reconstruction, *in.cloud, *in.pred, *in.gt,
                                                 in.symmetry, 1.0, params.symmetry_search);

    for (FaceId face : kAllFaces) {
        const auto& fv = in.votes->face(face);
        for (std::size_t j = 0; j < in.votes->n_points(); ++j) {
            const double target =
                vote_confidence_target(fv.distances[j], fv.directions[j], in.cloud->points()[j],
                                       face, *in.gt, params.k2);
            out.basic_vote_conf += std::abs(fv.confidences[j] - target);
        }
    }

    out.pc_rt = pc_pose_loss(*in.cloud, *in.pred);
    out.pc_s = pc_size_loss(*in.cloud, *in.pred, in.visible, params.score, 1.0, params.bin_cap,
                            params.bin_seed, params.mode);

    const BbPoseTerms bb = bb_pose_loss(*in.pred, *in.planes);
    out.bb_r = bb.bb_r;
    out.bb_t = bb.bb_t;
    out.bb_s = bb.bb_s;

    out.total = weighted_total(out, params.weights);
    return out;
}

}  // namespace geopose
