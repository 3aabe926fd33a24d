#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geopose/metrics.hpp"
#include "geopose/rng.hpp"
#include "oracles.hpp"

using namespace geopose;

namespace {
constexpr double kPi = std::numbers::pi;

Mat3 random_rotation(Rng& rng) {
    return rng.rotation();
}
}  // namespace

TEST_CASE("rotation_error: identity and constructed angles") {
    const Mat3 I = Mat3::Identity();
    CHECK(rotation_error_deg(I, I, SymmetrySpec::none()) == doctest::Approx(0.0));

    const Mat3 ten = rotation_about_axis(Vec3(0, 0, 1), 10.0 * kPi / 180.0);
    CHECK(rotation_error_deg(ten, I, SymmetrySpec::none()) == doctest::Approx(10.0));
    CHECK(rotation_error_deg(I, ten, SymmetrySpec::none()) == doctest::Approx(10.0));
}

TEST_CASE("rotation_error: rotational symmetry forgives axis spins") {
    Rng rng(13);
    const SymmetrySpec sym = SymmetrySpec::rotational(Vec3(0, 1, 0));
    for (int i = 0; i < 25; ++i) {
        const Mat3 R = random_rotation(rng);
        const Mat3 spun = R * rotation_about_axis(Vec3(0, 1, 0), 73.0 * kPi / 180.0);
        CHECK(rotation_error_deg(spun, R, sym) < 1e-6);

        // Closed form equals the brute-force grid minimum for generic pairs.
        const Mat3 other = random_rotation(rng);
        const Mat3 Q = other.transpose() * R;
        const double closed = rotation_error_deg(other, R, sym);
        const double brute =
            oracle::min_rotation_angle_bruteforce(Q, Vec3(0, 1, 0), 0.01) * 180.0 / kPi;
        CHECK(closed == doctest::Approx(brute).epsilon(1e-5));
        CHECK(closed <= brute + 1e-9);
    }
}

TEST_CASE("rotation_error: invariant when either argument spins about the axis") {
    Rng rng(14);
    const SymmetrySpec sym = SymmetrySpec::rotational(Vec3(0, 1, 0));
    const Mat3 a = random_rotation(rng);
    const Mat3 b = random_rotation(rng);
    const double base = rotation_error_deg(a, b, sym);
    for (double deg : {31.0, 117.0, 245.0}) {
        const Mat3 spin = rotation_about_axis(Vec3(0, 1, 0), deg * kPi / 180.0);
        CHECK(std::abs(rotation_error_deg(a * spin, b, sym) - base) < 1e-6);
        CHECK(std::abs(rotation_error_deg(a, b * spin, sym) - base) < 1e-6);
    }
}

TEST_CASE("rotation_error: reflection takes the better of the two readings") {
    const SymmetrySpec sym = SymmetrySpec::reflection(Vec3(1, 0, 0));
    const Mat3 I = Mat3::Identity();
    const Mat3 small = rotation_about_axis(Vec3(0, 1, 0), 5.0 * kPi / 180.0);
    const double err = rotation_error_deg(small, I, sym);
    CHECK(err <= 5.0 + 1e-9);
    CHECK(err >= 0.0);
    // Mirror-conjugating the relative rotation must never increase the error
    // beyond the plain geodesic reading.
    CHECK(err <= rotation_error_deg(small, I, SymmetrySpec::none()) + 1e-12);
}

TEST_CASE("pose_accuracy: threshold logic and monotonicity") {
    const Vec3 size(0.2, 0.2, 0.2);
    const Mat3 I = Mat3::Identity();
    const auto make_pair = [&](double deg, double cm) {
        const Mat3 R = rotation_about_axis(Vec3(0, 0, 1), deg * kPi / 180.0);
        return PosePair{Pose(R, Vec3(cm / 100.0, 0, 0), size), Pose(I, Vec3::Zero(), size),
                        SymmetrySpec::none()};
    };

    std::vector<PosePair> pairs = {make_pair(4.0, 1.0), make_pair(6.0, 1.0),
                                   make_pair(4.0, 4.0), make_pair(12.0, 1.0)};
    CHECK(pose_accuracy(pairs, 5.0, 2.0) == doctest::Approx(0.25));
    CHECK(pose_accuracy(pairs, 5.0, 5.0) == doctest::Approx(0.5));
    CHECK(pose_accuracy(pairs, 10.0, 5.0) == doctest::Approx(0.75));
    CHECK(pose_accuracy(pairs, 10.0, 10.0) == doctest::Approx(0.75));
    CHECK(pose_accuracy(pairs, 15.0, 10.0) == doctest::Approx(1.0));

    const double t1 = pose_accuracy(pairs, 5.0, 2.0);
    const double t2 = pose_accuracy(pairs, 5.0, 5.0);
    const double t3 = pose_accuracy(pairs, 10.0, 5.0);
    CHECK(t1 <= t2);
    CHECK(t2 <= t3);

    std::vector<PosePair> exact = {make_pair(0.0, 0.0)};
    for (auto [deg, cm] : std::initializer_list<std::pair<double, double>>{
             {5, 2}, {5, 5}, {10, 5}, {10, 10}})
        CHECK(pose_accuracy(exact, deg, cm) == doctest::Approx(1.0));

    CHECK_THROWS_AS(pose_accuracy({}, 5.0, 2.0), InvalidArgument);
}

TEST_CASE("iou_3d: identical and disjoint boxes") {
    const Pose box(Mat3::Identity(), Vec3(0.1, 0.2, 0.3), Vec3(0.4, 0.3, 0.5));
    const IouEstimate same = iou_3d(box, box, 20000, 3);
    CHECK(same.value == doctest::Approx(1.0));
    CHECK(same.std_error == doctest::Approx(0.0));

    const Pose far(Mat3::Identity(), Vec3(5, 0, 0), Vec3(0.4, 0.3, 0.5));
    CHECK(iou_3d(box, far, 20000, 3).value == doctest::Approx(0.0));
    CHECK_THROWS_AS(iou_3d(box, far, 0, 3), InvalidArgument);
}

TEST_CASE("iou_3d: analytic axis-aligned overlap") {
    const Pose a(Mat3::Identity(), Vec3::Zero(), Vec3::Ones());
    const Pose b(Mat3::Identity(), Vec3(0.5, 0, 0), Vec3::Ones());
    const double analytic =
        oracle::aabb_iou(Vec3::Zero(), Vec3::Ones(), Vec3(0.5, 0, 0), Vec3::Ones());
    CHECK(analytic == doctest::Approx(1.0 / 3.0));

    const IouEstimate est = iou_3d(a, b, 400000, 11);
    CHECK(std::abs(est.value - analytic) < 0.005);
    CHECK(est.std_error < 0.002);

    // Symmetric in the arguments up to Monte-Carlo error.
    const IouEstimate rev = iou_3d(b, a, 400000, 12);
    CHECK(std::abs(est.value - rev.value) < 4.0 * (est.std_error + rev.std_error));
}

TEST_CASE("iou_3d: invariant under a common rigid transform (same seed)") {
    Rng rng(55);
    const Pose a(random_rotation(rng), Vec3(0.1, 0, 1.0), Vec3(0.3, 0.25, 0.2));
    const Pose b(random_rotation(rng), Vec3(0.15, 0.05, 1.05), Vec3(0.28, 0.3, 0.24));
    const IouEstimate base = iou_3d(a, b, 200000, 21);

    const Mat3 W = random_rotation(rng);
    const Vec3 shift(0.4, -0.2, 0.6);
    const Pose a2(W * a.rotation(), W * a.translation() + shift, a.size());
    const Pose b2(W * b.rotation(), W * b.translation() + shift, b.size());
    const IouEstimate moved = iou_3d(a2, b2, 200000, 21);
    // Local-frame sampling makes the two runs geometrically identical.
    CHECK(std::abs(base.value - moved.value) < 3.0 * (base.std_error + 1e-12));
}

TEST_CASE("iou_precision: counts thresholds over constructed overlaps") {
    // Axis-aligned offsets with known IoU (1-d)/(1+d): 0.2, 0.6, 0.9.
    const auto pair_with_iou = [&](double target) {
        const double d = (1.0 - target) / (1.0 + target);
        return PosePair{Pose(Mat3::Identity(), Vec3(d, 0, 0), Vec3::Ones()),
                        Pose(Mat3::Identity(), Vec3::Zero(), Vec3::Ones()),
                        SymmetrySpec::none()};
    };
    std::vector<PosePair> pairs = {pair_with_iou(0.2), pair_with_iou(0.6), pair_with_iou(0.9)};
    CHECK(iou_precision(pairs, 0.5, 100000, 9) == doctest::Approx(2.0 / 3.0));
    CHECK(iou_precision(pairs, 0.25, 100000, 9) == doctest::Approx(2.0 / 3.0));
    CHECK(iou_precision(pairs, 0.95, 100000, 9) == doctest::Approx(0.0));
    CHECK(iou_precision(pairs, 0.1, 100000, 9) == doctest::Approx(1.0));
}

TEST_CASE("align_symmetric_gt: spins gt onto the prediction") {
    Rng rng(77);
    const SymmetrySpec sym = SymmetrySpec::rotational(Vec3(0, 1, 0));
    const Mat3 R = random_rotation(rng);
    const Pose pred(R, Vec3(0, 0, 1), Vec3(0.2, 0.3, 0.2));
    const Pose gt(R * rotation_about_axis(Vec3(0, 1, 0), 1.1), Vec3(0, 0, 1),
                  Vec3(0.2, 0.3, 0.2));
    const Pose aligned = align_symmetric_gt(pred, gt, sym);
    CHECK((aligned.rotation() - R).cwiseAbs().maxCoeff() < 1e-9);
    // Non-rotational symmetry is a pass-through.
    const Pose untouched = align_symmetric_gt(pred, gt, SymmetrySpec::none());
    CHECK((untouched.rotation() - gt.rotation()).norm() == 0.0);
}
