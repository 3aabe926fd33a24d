#include <doctest.h>

#include <cmath>

#include "geopose/bbox_voting.hpp"
#include "geopose/rng.hpp"
#include "geopose/synthgen.hpp"
#include "oracles.hpp"

using namespace geopose;

TEST_CASE("face helpers") {
    CHECK(face_axis(FaceId::y_pos) == 1);
    CHECK(face_sign(FaceId::z_neg) == -1.0);
    CHECK(opposite_face(FaceId::x_pos) == FaceId::x_neg);
    CHECK((canonical_face_normal(FaceId::y_neg) - Vec3(0, -1, 0)).norm() == 0.0);
    CHECK(parse_face("y+") == FaceId::y_pos);
    CHECK_THROWS_AS(parse_face("w+"), InvalidArgument);
}

TEST_CASE("project_votes: axis-aligned step and zero distance") {
    const PointCloud cloud({Vec3(0, 0, 0), Vec3(0.1, 0, 0)});
    std::array<FaceVoteSet::FaceVotes, 6> votes;
    for (FaceId f : kAllFaces) {
        auto& fv = votes[static_cast<std::size_t>(f)];
        fv.directions = {Vec3(0, 1, 0), Vec3(0, 1, 0)};
        fv.distances = {0.5, 0.0};
        fv.confidences = {1.0, 1.0};
    }
    const FaceVoteSet set(2, votes);
    const auto projected = project_votes(cloud, set, FaceId::y_pos);
    CHECK((projected[0] - Vec3(0, 0.5, 0)).norm() == 0.0);
    CHECK((projected[1] - cloud.points()[1]).norm() == 0.0);

    const PointCloud shorter({Vec3(0, 0, 0)});
    CHECK_THROWS_AS(project_votes(shorter, set, FaceId::y_pos), InvalidArgument);
}

TEST_CASE("project_votes: noiseless generator votes land on the gt plane") {
    SceneSpec spec;
    spec.shape = ShapeKind::box;
    spec.size = Vec3(0.2, 0.3, 0.25);
    spec.seed = 3;
    spec.n_points = 400;
    const Scene scene = generate_scene(spec);
    const FaceVoteSet votes = ground_truth_votes(scene);
    for (FaceId face : kAllFaces) {
        const Vec3 n = world_face_normal(face, scene.gt);
        const double d = n.dot(scene.gt.translation()) +
                         scene.gt.size()[face_axis(face)] / 2.0;
        for (const Vec3& p : project_votes(scene.cloud, votes, face))
            CHECK(std::abs(n.dot(p) - d) < 1e-9);
    }
}

TEST_CASE("fit_plane_weighted: exact plane and zero-weight invariance") {
    std::vector<Vec3> pts = {Vec3(0, 1, 0), Vec3(1, 1, 0), Vec3(0, 1, 1), Vec3(1, 1, 1)};
    std::vector<double> w = {1.0, 1.0, 1.0, 1.0};
    const PlaneParams plane = fit_plane_weighted(pts, w, Vec3(0, 1, 0));
    CHECK((plane.N - Vec3(0, 1, 0)).norm() < 1e-12);
    CHECK(plane.D == doctest::Approx(1.0).epsilon(1e-12));

    // Unhinted fit picks the D >= 0 orientation.
    const PlaneParams unhinted = fit_plane_weighted(pts, w);
    CHECK((unhinted.N - Vec3(0, 1, 0)).norm() < 1e-12);

    pts.push_back(Vec3(0, 5, 0));
    w.push_back(0.0);
    const PlaneParams with_ghost = fit_plane_weighted(pts, w, Vec3(0, 1, 0));
    CHECK((with_ghost.N - plane.N).norm() < 1e-12);
    CHECK(with_ghost.D == doctest::Approx(plane.D).epsilon(1e-12));
}

TEST_CASE("fit_plane_weighted: weight scale invariance") {
    Rng rng(9);
    std::vector<Vec3> pts;
    std::vector<double> w;
    for (int i = 0; i < 50; ++i) {
        pts.push_back(Vec3(rng.uniform(-1, 1), 0.2 * rng.uniform(-1, 1) + 0.5,
                           rng.uniform(-1, 1)));
        w.push_back(rng.uniform(0.1, 1.0));
    }
    const PlaneParams base = fit_plane_weighted(pts, w);
    std::vector<double> scaled = w;
    for (double& x : scaled) x *= 37.5;
    const PlaneParams same = fit_plane_weighted(pts, scaled);
    CHECK((base.N - same.N).norm() < 1e-12);
    CHECK(base.D == doctest::Approx(same.D).epsilon(1e-12));
}

TEST_CASE("fit_plane_weighted: matches independent TLS oracles on noisy planes") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        Vec3 normal = rng.normal_vec3(1.0);
        while (normal.norm() < 1e-3) normal = rng.normal_vec3(1.0);
        normal.normalize();
        const double dist = rng.uniform(-1.0, 1.0);
        Vec3 u = normal.cross(Vec3(1, 0, 0));
        if (u.norm() < 1e-3) u = normal.cross(Vec3(0, 1, 0));
        u.normalize();
        const Vec3 v = normal.cross(u);

        std::vector<Vec3> pts;
        std::vector<double> w;
        for (int i = 0; i < 200; ++i) {
            const Vec3 p = dist * normal + rng.uniform(-0.3, 0.3) * u +
                           rng.uniform(-0.3, 0.3) * v + rng.normal_vec3(0.001);
            pts.push_back(p);
            w.push_back(rng.uniform(0.2, 1.0));
        }

        const PlaneParams fit = fit_plane_weighted(pts, w, normal);
        auto [n_svd, d_svd] = oracle::tls_plane_svd(pts, w);
        if (n_svd.dot(normal) < 0) {
            n_svd = -n_svd;
            d_svd = -d_svd;
        }
        CHECK((fit.N - n_svd).norm() < 1e-6);
        CHECK(std::abs(fit.D - d_svd) < 1e-6);

        if (trial < 5) {
            auto [n_bf, d_bf] = oracle::tls_plane_bruteforce(pts, w);
            if (n_bf.dot(normal) < 0) {
                n_bf = -n_bf;
                d_bf = -d_bf;
            }
            CHECK((fit.N - n_bf).norm() < 2e-4);
            CHECK(std::abs(fit.D - d_bf) < 2e-4);
        }
    }
}

TEST_CASE("fit_plane_weighted: noiseless residual is numerically zero") {
    Rng rng(4);
    std::vector<Vec3> pts;
    std::vector<double> w;
    const Vec3 n = Vec3(1, 2, -0.5).normalized();
    for (int i = 0; i < 60; ++i) {
        Vec3 t = n.cross(Vec3(0, 0, 1)).normalized();
        const Vec3 b = n.cross(t);
        pts.push_back(0.4 * n + rng.uniform(-0.2, 0.2) * t + rng.uniform(-0.2, 0.2) * b);
        w.push_back(rng.uniform(0.5, 1.0));
    }
    const PlaneParams fit = fit_plane_weighted(pts, w, n);
    double residual = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double r = fit.N.dot(pts[i]) - fit.D;
        residual += w[i] * r * r;
    }
    CHECK(residual < 1e-18);
}

TEST_CASE("fit_plane_weighted: degenerate inputs") {
    std::vector<Vec3> line = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)};
    std::vector<double> w = {1, 1, 1, 1};
    CHECK_THROWS_AS(fit_plane_weighted(line, w), DegenerateInput);

    std::vector<Vec3> pts = {Vec3(0, 1, 0), Vec3(1, 1, 0), Vec3(0, 1, 1), Vec3(1, 1, 1)};
    std::vector<double> low = {1.0, 1.0, 1e-9, 1e-9};  // only two effective points
    CHECK_THROWS_AS(fit_plane_weighted(pts, low), DegenerateInput);
}

TEST_CASE("vote_confidence_target") {
    const Pose gt(Mat3::Identity(), Vec3(0, 0, 1), Vec3(0.2, 0.3, 0.4));
    const double k2 = 1.0 / 303.5;
    const Vec3 p = gt.translation();  // box center

    // Perfect vote onto y+: distance s_y/2 along +y.
    CHECK(vote_confidence_target(0.15, Vec3(0, 1, 0), p, FaceId::y_pos, gt, k2) ==
          doctest::Approx(1.0));

    // Residual of 0.01 m: exp(-3.035).
    CHECK(vote_confidence_target(0.16, Vec3(0, 1, 0), p, FaceId::y_pos, gt, k2) ==
          doctest::Approx(std::exp(-3.035)).epsilon(1e-12));
    CHECK(std::exp(-3.035) == doctest::Approx(0.0480747).epsilon(1e-5));

    // Monotone decreasing in the vote residual.
    double prev = 2.0;
    for (double extra : {0.0, 0.005, 0.01, 0.02, 0.05}) {
        const double c =
            vote_confidence_target(0.15 + extra, Vec3(0, 1, 0), p, FaceId::y_pos, gt, k2);
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("vote confidences: closer points score higher in distance-shaped mode") {
    SceneSpec spec;
    spec.shape = ShapeKind::box;
    spec.size = Vec3(0.25, 0.25, 0.25);
    spec.seed = 12;
    spec.n_points = 600;
    const Scene scene = generate_scene(spec);
    const FaceVoteSet votes = ground_truth_votes(scene, VoteConfidenceMode::distance_shaped);
    for (FaceId face : kAllFaces) {
        const auto& fv = votes.face(face);
        for (std::size_t a = 0; a < 100; ++a) {
            for (std::size_t b = a + 1; b < 100; ++b) {
                if (fv.distances[a] < fv.distances[b])
                    CHECK(fv.confidences[a] >= fv.confidences[b]);
                else if (fv.distances[a] > fv.distances[b])
                    CHECK(fv.confidences[a] <= fv.confidences[b]);
            }
        }
    }
}

TEST_CASE("recover_box: canonical unit cube") {
    FacePlanes planes;
    for (FaceId f : kAllFaces)
        planes.emplace(f, PlaneParams(canonical_face_normal(f), 0.5));
    const RecoveredBox box = recover_box(planes);
    CHECK(box.center.norm() < 1e-12);
    CHECK((box.extents - Vec3::Ones()).norm() < 1e-12);
    CHECK((box.axes - Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("recover_box: rotated cube round trip") {
    const Mat3 R = rotation_about_axis(Vec3(1, 2, 3).normalized(), 0.8);
    const Vec3 t(0.2, -0.1, 1.1);
    const Vec3 s(0.3, 0.2, 0.5);
    FacePlanes planes;
    for (FaceId f : kAllFaces) {
        const Vec3 n = R * canonical_face_normal(f);
        planes.emplace(f, PlaneParams(n, n.dot(t) + s[face_axis(f)] / 2.0));
    }
    const RecoveredBox box = recover_box(planes);
    CHECK((box.axes - R).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((box.center - t).norm() < 1e-9);
    CHECK((box.extents - s).norm() < 1e-9);
}

TEST_CASE("recover_box: rejects inconsistent plane sets") {
    FacePlanes planes;
    for (FaceId f : kAllFaces)
        planes.emplace(f, PlaneParams(canonical_face_normal(f), 0.5));
    planes.erase(FaceId::z_neg);
    CHECK_THROWS_AS(recover_box(planes), InvalidArgument);

    planes.emplace(FaceId::z_neg,
                   PlaneParams(rodrigues_rotate(Vec3(0, 0, -1), Vec3(1, 0, 0), 0.3), 0.5));
    CHECK_THROWS_AS(recover_box(planes), DegenerateInput);
}
