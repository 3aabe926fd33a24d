#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geopose/rng.hpp"
#include "geopose/symmetry.hpp"

using namespace geopose;

namespace {
constexpr double kPi = std::numbers::pi;

PointCloud cylinder_cloud(int n, double radius, double half_height, Rng& rng) {
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) {
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        pts.push_back(Vec3(radius * std::cos(phi), rng.uniform(-half_height, half_height),
                           radius * std::sin(phi)));
    }
    return PointCloud(std::move(pts));
}
}  // namespace

TEST_CASE("symmetry_map: none with pred == gt is the identity") {
    const Pose pose(rotation_about_axis(Vec3(0, 1, 0), 0.7), Vec3(0.1, 0.2, 0.9),
                    Vec3(0.2, 0.2, 0.2));
    const PointCloud cloud({Vec3(0.1, 0.2, 1.0), Vec3(-0.05, 0.15, 0.85)});
    const PointCloud mapped = symmetry_map(cloud, pose, pose, SymmetrySpec::none());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK((mapped.points()[i] - cloud.points()[i]).norm() < 1e-14);
}

TEST_CASE("symmetry_map: reflection swaps a mirror pair") {
    const Pose identity = Pose::identity(Vec3(0.4, 0.4, 0.4));
    const double a = 0.1, b = 0.05, c = -0.02;
    const PointCloud cloud({Vec3(a, b, c), Vec3(-a, b, c)});
    const PointCloud mapped =
        symmetry_map(cloud, identity, identity, SymmetrySpec::reflection(Vec3(1, 0, 0)));
    CHECK((mapped.points()[0] - Vec3(-a, b, c)).norm() < 1e-15);
    CHECK((mapped.points()[1] - Vec3(a, b, c)).norm() < 1e-15);
}

TEST_CASE("symmetry_map: reflection applied twice is the identity") {
    Rng rng(42);
    const Pose pose(rotation_about_axis(Vec3(1, 1, 0).normalized(), 1.1), Vec3(0, 0, 1.2),
                    Vec3(0.3, 0.3, 0.3));
    std::vector<Vec3> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(pose.to_camera(rng.normal_vec3(0.1)));
    const PointCloud cloud(std::move(pts));
    const SymmetrySpec sym = SymmetrySpec::reflection(Vec3(0.3, 0.9, 0.1));

    const PointCloud once = symmetry_map(cloud, pose, pose, sym);
    const PointCloud twice = symmetry_map(once, pose, pose, sym);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK((twice.points()[i] - cloud.points()[i]).norm() < 1e-12);
}

TEST_CASE("symmetry_map: rotational recovers an axis spin") {
    // gt differs from pred by a 37-degree spin about the cylinder axis;
    // the mapped target must coincide with the cloud itself.
    Rng rng(8);
    const Mat3 R = rotation_about_axis(Vec3(0.2, 0.5, 1.0).normalized(), 0.6);
    const Vec3 t(0.05, -0.1, 1.0);
    const Vec3 s(0.2, 0.3, 0.2);
    const Pose pred(R, t, s);
    const Pose gt(R * rotation_about_axis(Vec3(0, 1, 0), 37.0 * kPi / 180.0), t, s);

    std::vector<Vec3> pts;
    const PointCloud canonical = cylinder_cloud(400, 0.1, 0.15, rng);
    for (const Vec3& q : canonical.points()) pts.push_back(pred.to_camera(q));
    const PointCloud cloud(std::move(pts));

    const SymmetrySpec sym = SymmetrySpec::rotational(Vec3(0, 1, 0));
    const PointCloud mapped = symmetry_map(cloud, pred, gt, sym);
    double max_err = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        max_err = std::max(max_err, (mapped.points()[i] - cloud.points()[i]).norm());
    CHECK(max_err < 1e-6);

    // Brute-force angle grid agrees that the best alignment is essentially exact.
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3600; ++k) {
        const Mat3 spin = rotation_about_axis(Vec3(0, 1, 0), k * 2.0 * kPi / 3600.0);
        double cost = 0.0;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            cost += (spin * gt.to_canonical(cloud.points()[i]) -
                     pred.to_canonical(cloud.points()[i]))
                        .lpNorm<1>();
        best = std::min(best, cost / cloud.size());
    }
    CHECK(best < 1e-3);
}

TEST_CASE("symmetry_reconstruction_loss: zero at exact reconstruction, offset closed form") {
    Rng rng(3);
    const Pose pose(rotation_about_axis(Vec3(0, 0, 1), 0.25), Vec3(0, 0, 0.8),
                    Vec3(0.2, 0.2, 0.2));
    std::vector<Vec3> pts;
    for (int i = 0; i < 64; ++i) pts.push_back(pose.to_camera(rng.normal_vec3(0.08)));
    const PointCloud cloud(std::move(pts));
    const SymmetrySpec sym = SymmetrySpec::none();

    const PointCloud target = symmetry_map(cloud, pose, pose, sym);
    CHECK(symmetry_reconstruction_loss(target, cloud, pose, pose, sym, 0.125) ==
          doctest::Approx(0.0).epsilon(1e-15));

    const Vec3 delta(0.01, -0.02, 0.005);
    std::vector<Vec3> shifted;
    for (const Vec3& p : target.points()) shifted.push_back(p + delta);
    const double loss =
        symmetry_reconstruction_loss(PointCloud(std::move(shifted)), cloud, pose, pose, sym,
                                     0.125);
    CHECK(loss == doctest::Approx(0.125 * delta.lpNorm<1>()).epsilon(1e-12));
}

TEST_CASE("symmetry_reconstruction_loss: rotational loss ignores gt axis spin") {
    Rng rng(15);
    const Mat3 R = rotation_about_axis(Vec3(1, 0.3, 0).normalized(), 0.9);
    const Vec3 t(0, 0.1, 1.1);
    const Vec3 s(0.16, 0.24, 0.16);
    const Pose pred(R, t, s);

    const PointCloud canonical = cylinder_cloud(500, 0.08, 0.12, rng);
    std::vector<Vec3> pts;
    for (const Vec3& q : canonical.points()) pts.push_back(pred.to_camera(q));
    const PointCloud cloud(std::move(pts));
    std::vector<Vec3> recon_pts = cloud.points();
    for (Vec3& p : recon_pts) p += rng.normal_vec3(0.002);
    const PointCloud recon(std::move(recon_pts));

    const SymmetrySpec sym = SymmetrySpec::rotational(Vec3(0, 1, 0));
    const double base = symmetry_reconstruction_loss(recon, cloud, pred, pred, sym, 1.0);
    for (double deg : {20.0, 135.0, 301.0}) {
        const Pose gt_spun(R * rotation_about_axis(Vec3(0, 1, 0), deg * kPi / 180.0), t, s);
        const double spun = symmetry_reconstruction_loss(recon, cloud, pred, gt_spun, sym, 1.0);
        CHECK(std::abs(spun - base) < 1e-6);
    }
}

TEST_CASE("symmetry_reconstruction_loss: size mismatch") {
    const Pose pose = Pose::identity(Vec3(0.1, 0.1, 0.1));
    const PointCloud a({Vec3(0, 0, 0), Vec3(1, 0, 0)});
    const PointCloud b({Vec3(0, 0, 0)});
    CHECK_THROWS_AS(symmetry_reconstruction_loss(b, a, pose, pose, SymmetrySpec::none(), 1.0),
                    InvalidArgument);
}
