#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "navsim/geometry.hpp"

using namespace navsim;

TEST_CASE("apply_transform basics") {
    const auto ry = HomogeneousTransform::rotation_y_180();
    const Vec3 p1 = apply_transform(ry, {1.0, 2.0, 3.0});
    CHECK(p1.x() == doctest::Approx(-1.0));
    CHECK(p1.y() == doctest::Approx(2.0));
    CHECK(p1.z() == doctest::Approx(-3.0));

    const auto id = HomogeneousTransform::identity();
    const Vec3 p2 = apply_transform(id, {4.0, 5.0, 6.0});
    CHECK((p2 - Vec3(4.0, 5.0, 6.0)).norm() == doctest::Approx(0.0));

    const auto moved = HomogeneousTransform::rotation_y_180({0.5, 0.0, 2.0});
    const Vec3 p3 = apply_transform(moved, {1.0, 0.0, 0.0});
    CHECK(p3.x() == doctest::Approx(-0.5));
    CHECK(p3.y() == doctest::Approx(0.0));
    CHECK(p3.z() == doctest::Approx(2.0));
}

TEST_CASE("transform bottom row and orthonormality") {
    const auto ry = HomogeneousTransform::rotation_y_180({1.0, 2.0, 3.0});
    const Eigen::Matrix4d m = ry.matrix();
    CHECK(m(3, 0) == 0.0);
    CHECK(m(3, 1) == 0.0);
    CHECK(m(3, 2) == 0.0);
    CHECK(m(3, 3) == 1.0);
    CHECK(ry.rotation_is_orthonormal());
}

TEST_CASE("random transforms compose with inverse to identity") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
        q.normalize();
        HomogeneousTransform t;
        t.rotation = q.toRotationMatrix();
        t.translation = Vec3(gauss(rng), gauss(rng), gauss(rng));
        REQUIRE(t.rotation_is_orthonormal(1e-9));

        const Vec3 p(gauss(rng), gauss(rng), gauss(rng));
        const Vec3 round = apply_transform(t.inverse(), apply_transform(t, p));
        CHECK((round - p).norm() < 1e-9);

        // Associativity of composition.
        HomogeneousTransform u;
        u.rotation = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng))
                         .normalized()
                         .toRotationMatrix();
        u.translation = Vec3(gauss(rng), gauss(rng), gauss(rng));
        const Vec3 a = apply_transform(t.compose(u), p);
        const Vec3 b = apply_transform(t, apply_transform(u, p));
        CHECK((a - b).norm() < 1e-9);
    }
}

namespace {

CameraModel test_camera() {
    CameraModel cam;
    cam.fx = 600.0;
    cam.fy = 600.0;
    cam.cx = 320.0;
    cam.cy = 240.0;
    return cam;
}

}  // namespace

TEST_CASE("projection examples") {
    const CameraModel cam = test_camera();
    const Vec2 center = project(cam, {0.0, 0.0, 3.0});
    CHECK(center.x() == doctest::Approx(320.0));
    CHECK(center.y() == doctest::Approx(240.0));

    const Vec2 off = project(cam, {0.5, 0.0, 3.0});
    CHECK(off.x() == doctest::Approx(420.0));
    CHECK(off.y() == doctest::Approx(240.0));

    CHECK_THROWS_AS((void)project(cam, {0.0, 0.0, -1.0}), PointBehindCamera);
}

TEST_CASE("projection then back-projection recovers the point") {
    const CameraModel cam = test_camera();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::uniform_real_distribution<double> depth(1.0, 6.0);
    for (int i = 0; i < 100; ++i) {
        const Vec3 p(u(rng), u(rng), depth(rng));
        const Vec2 uv = project(cam, p);
        const Vec3 ray = pixel_ray(cam, uv);
        const Vec3 back = ray * p.z();
        CHECK((back - p).norm() < 1e-6);
    }
}

TEST_CASE("distortion model") {
    CameraModel cam = test_camera();
    cam.k1 = 0.1;
    cam.k2 = 0.0;
    const Vec2 zero = distort(cam, {0.0, 0.0});
    CHECK(zero.norm() == doctest::Approx(0.0));

    const Vec2 d = distort(cam, {1.0, 0.0});
    CHECK(d.x() == doctest::Approx(1.1));
    CHECK(d.y() == doctest::Approx(0.0));
}

TEST_CASE("undistort inverts distort on a grid") {
    CameraModel cam = test_camera();
    cam.k1 = -0.12;
    cam.k2 = 0.03;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const Vec2 p(-0.7 + 1.4 * i / 9.0, -0.7 + 1.4 * j / 9.0);
            if (p.norm() > 1.0) {
                continue;
            }
            const Vec2 back = undistort(cam, distort(cam, p));
            CHECK((back - p).norm() < 1e-6);
        }
    }
}

TEST_CASE("ellipsoid fit recovers generating parameters") {
    const EllipsoidZCorrection truth{20.0, 15.0, 30.0};
    std::vector<EllipsoidSample> samples;
    for (int i = -4; i <= 4; ++i) {
        for (int j = -4; j <= 4; ++j) {
            const double x = i * 3.0;
            const double y = j * 2.5;
            samples.push_back({x, y, truth.model_z(x, y)});
        }
    }
    const EllipsoidFit fit = fit_ellipsoid_z(samples);
    CHECK(fit.correction.semi_axis_a == doctest::Approx(20.0).epsilon(1e-6));
    CHECK(fit.correction.semi_axis_b == doctest::Approx(15.0).epsilon(1e-6));
    CHECK(fit.correction.apex_z == doctest::Approx(30.0).epsilon(1e-6));
    CHECK(fit.residual_rms < 1e-6);
}

TEST_CASE("ellipsoid fit on flat data acts as identity") {
    std::vector<EllipsoidSample> samples;
    for (int i = -3; i <= 3; ++i) {
        for (int j = -3; j <= 3; ++j) {
            samples.push_back({i * 2.0, j * 2.0, 25.0});
        }
    }
    const EllipsoidFit fit = fit_ellipsoid_z(samples);
    for (const auto& s : samples) {
        WhyConPose pose;
        pose.x = s.x;
        pose.y = s.y;
        pose.z = s.z_raw;
        const WhyConPose corrected = correct_z(fit.correction, pose);
        CHECK(std::abs(corrected.z - pose.z) < 1e-3);
    }
}

TEST_CASE("ellipsoid fit degenerate inputs") {
    std::vector<EllipsoidSample> three = {{0, 0, 30}, {1, 0, 29}, {0, 1, 29}};
    CHECK_THROWS_AS((void)fit_ellipsoid_z(three), DegenerateSamples);

    std::vector<EllipsoidSample> same_xy(8, {2.0, 3.0, 28.0});
    CHECK_THROWS_AS((void)fit_ellipsoid_z(same_xy), DegenerateSamples);
}

TEST_CASE("correct_z examples") {
    const EllipsoidZCorrection c{20.0, 15.0, 30.0};

    WhyConPose apex;
    apex.z = 28.5;
    const WhyConPose same = correct_z(c, apex);
    CHECK(same.z == doctest::Approx(28.5));

    WhyConPose off;
    off.x = 10.0;
    off.z = c.model_z(10.0, 0.0);
    const WhyConPose fixed = correct_z(c, off);
    CHECK(fixed.z == doctest::Approx(30.0).epsilon(1e-6));

    WhyConPose outside;
    outside.x = 21.0;
    outside.z = 10.0;
    CHECK_THROWS_AS((void)correct_z(c, outside), FitOutOfDomain);
}

TEST_CASE("unit conversion") {
    WhyConPose p;
    p.x = 1.0;
    const Vec3 m1 = units_to_meters(p);
    CHECK(m1.x() == doctest::Approx(0.10));
    CHECK(m1.y() == doctest::Approx(0.0));

    const Vec3 zero = units_to_meters(Vec3::Zero());
    CHECK(zero.norm() == 0.0);

    const Vec3 m2 = units_to_meters(Vec3(-3.5, 2.0, 10.0));
    CHECK(m2.x() == doctest::Approx(-0.35));
    CHECK(m2.y() == doctest::Approx(0.20));
    CHECK(m2.z() == doctest::Approx(1.0));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 50; ++i) {
        const Vec3 v(u(rng), u(rng), u(rng));
        const double a = u(rng);
        // Exactly linear, and the roundtrip is exact to 1e-12.
        CHECK((units_to_meters(a * v) - a * units_to_meters(v)).norm() < 1e-12);
        CHECK((meters_to_units(units_to_meters(v)) - v).norm() < 1e-12);
    }
}
