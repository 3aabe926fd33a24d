#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "geopose/core.hpp"

// Point-wise bounding-box face voting: vote projection, confidence
// targets, confidence-weighted least-squares plane fitting and box
// recovery from six fitted planes.

namespace geopose {

enum class FaceId { y_pos, y_neg, x_pos, x_neg, z_pos, z_neg };

inline constexpr std::array<FaceId, 6> kAllFaces = {FaceId::y_pos, FaceId::y_neg, FaceId::x_pos,
                                                    FaceId::x_neg, FaceId::z_pos, FaceId::z_neg};
// The positive faces, in axis order x, y, z.
inline constexpr std::array<FaceId, 3> kPositiveFaces = {FaceId::x_pos, FaceId::y_pos,
                                                         FaceId::z_pos};

int face_axis(FaceId face);       // 0=x, 1=y, 2=z
double face_sign(FaceId face);    // +1 or -1
FaceId opposite_face(FaceId face);
FaceId face_from_axis(int axis, bool positive);
Vec3 canonical_face_normal(FaceId face);  // sign * e_axis
const char* face_name(FaceId face);       // "y+", "y-", ...
FaceId parse_face(const std::string& name);

// World-frame outward normal of a posed box face.
inline Vec3 world_face_normal(FaceId face, const Pose& pose) {
    return face_sign(face) * pose.rotation().col(face_axis(face));
}

// Per-point direction/distance/confidence toward each of the six faces.
class FaceVoteSet {
  public:
    struct FaceVotes {
        std::vector<Vec3> directions;   // unit
        std::vector<double> distances;  // meters, >= 0
        std::vector<double> confidences;  // (0, 1]
    };

    FaceVoteSet(std::size_t n_points, std::array<FaceVotes, 6> votes);

    std::size_t n_points() const { return n_points_; }
    const FaceVotes& face(FaceId id) const { return votes_[static_cast<std::size_t>(id)]; }

  private:
    std::size_t n_points_;
    std::array<FaceVotes, 6> votes_;
};

// Plane N.x = D with unit N.
struct PlaneParams {
    Vec3 N;
    double D;

    PlaneParams(const Vec3& normal, double distance);
    double signed_distance(const Vec3& p) const { return N.dot(p) - D; }
};

using FacePlanes = std::map<FaceId, PlaneParams>;

// p'_j = p_j + n_j * d_j for the given face.
std::vector<Vec3> project_votes(const PointCloud& cloud, const FaceVoteSet& votes, FaceId face);

// Weighted total least squares: minimizes sum w_j (N.p_j - D)^2 over unit
// N via the smallest eigenvector of the weighted scatter matrix. The
// eigenvector sign is ambiguous; when an orientation hint is supplied the
// normal is flipped to have non-negative dot with it, otherwise the sign
// is fixed so D >= 0 (first non-zero component positive on ties).
PlaneParams fit_plane_weighted(std::span<const Vec3> points, std::span<const double> weights,
                               const std::optional<Vec3>& orientation_hint = std::nullopt);

// Ground-truth confidence for one vote: exp(-|d n - f r_gt| / k2) where
// f is the canonical-frame distance from the point to the face and r_gt
// the world-frame face normal.
double vote_confidence_target(double d, const Vec3& n, const Vec3& p, FaceId face, const Pose& gt,
                              double k2);

// Canonical-frame distance from camera-frame point p to the gt face
// plane: s_gt[axis]/2 - sign * (R_gt^T (p - t_gt))[axis].
double face_distance(const Vec3& p, FaceId face, const Pose& gt);

struct RecoveredBox {
    Vec3 center;
    Vec3 extents;
    Mat3 axes;  // columns: box axes for x, y, z
};

// Recovers center/extents/axes from six fitted planes: per axis the two
// opposite normals are averaged into a common direction, the extent is
// the gap between the re-expressed offsets, and the center solves the
// three mid-plane equations.
RecoveredBox recover_box(const FacePlanes& planes);

}  // namespace geopose
