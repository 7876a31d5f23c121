#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "navsim/errors.hpp"

namespace navsim {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform stored as rotation + translation; 4x4 form has an exact
/// [0 0 0 1] bottom row. Rotation must be orthonormal within 1e-9.
struct HomogeneousTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static HomogeneousTransform identity() { return {}; }

    // 180 degree rotation about the y axis, the drone->camera convention.
    static HomogeneousTransform rotation_y_180(const Vec3& t = Vec3::Zero());

    Eigen::Matrix4d matrix() const;
    HomogeneousTransform inverse() const;
    HomogeneousTransform compose(const HomogeneousTransform& other) const;

    bool rotation_is_orthonormal(double tol = 1e-9) const;
};

/// R*p + t. Total function; the transform is assumed valid.
Vec3 apply_transform(const HomogeneousTransform& t, const Vec3& p);

/// Pinhole camera with two-term radial distortion. Extrinsics map world
/// coordinates into the camera frame (z forward, x right, y down in image).
struct CameraModel {
    double fx = 600.0;
    double fy = 600.0;
    double cx = 320.0;
    double cy = 240.0;
    double k1 = 0.0;  // radial distortion; >0 barrel, <0 pincushion
    double k2 = 0.0;
    HomogeneousTransform world_to_camera;
    int width = 640;
    int height = 480;
    double fps = 120.0;

    Vec3 to_camera_frame(const Vec3& world_point) const {
        return apply_transform(world_to_camera, world_point);
    }
};

/// Apply the radial model to normalized image coordinates:
/// x' = x*(1 + k1*r^2 + k2*r^4), r^2 = x^2 + y^2.
Vec2 distort(const CameraModel& cam, const Vec2& normalized);

/// Numerical inverse of distort by fixed-point iteration (tol 1e-9, 50
/// iterations). Throws UndistortDiverged if the iteration does not settle.
Vec2 undistort(const CameraModel& cam, const Vec2& distorted);

/// Project a world point to pixel coordinates. Throws PointBehindCamera when
/// the camera-frame depth is not positive.
Vec2 project(const CameraModel& cam, const Vec3& world_point);

/// Back-project pixel (u, v) to the camera-frame ray direction (x, y, 1),
/// undistorting first.
Vec3 pixel_ray(const CameraModel& cam, const Vec2& pixel);

/// Marker position in WhyCon units. One unit is about 10 cm in x/y.
struct WhyConPose {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    int id = 0;
    double timestamp = 0.0;

    Vec3 vec() const { return {x, y, z}; }
};

/// Semi-ellipsoid correction for the radial droop in raw z readings.
/// z_model(x, y) = z0 * sqrt(1 - x^2/A^2 - y^2/B^2); apex on the optical axis.
struct EllipsoidZCorrection {
    double semi_axis_a = 20.0;  // WhyCon units
    double semi_axis_b = 15.0;
    double apex_z = 30.0;

    // Model z at (x, y); throws FitOutOfDomain outside the ellipse footprint.
    double model_z(double x, double y) const;
};

struct EllipsoidSample {
    double x;
    double y;
    double z_raw;
};

struct EllipsoidFit {
    EllipsoidZCorrection correction;
    double residual_rms = 0.0;
};

/// Least-squares fit of the semi-ellipsoid to raw (x, y, z) readings.
/// Linear initialization on z^2 followed by Gauss-Newton refinement
/// (100-iteration cap). Requires >= 6 samples with distinct (x, y).
EllipsoidFit fit_ellipsoid_z(const std::vector<EllipsoidSample>& samples);

/// Replace pose z with z_raw * z0 / z_model(x, y). Identity at the apex.
WhyConPose correct_z(const EllipsoidZCorrection& c, const WhyConPose& pose);

/// Linear WhyCon-unit <-> metric mapping (default 0.10 m per unit).
struct UnitScale {
    double meters_per_unit = 0.10;
};

Vec3 units_to_meters(const WhyConPose& pose, const UnitScale& scale = {});
Vec3 units_to_meters(const Vec3& units, const UnitScale& scale = {});
Vec3 meters_to_units(const Vec3& meters, const UnitScale& scale = {});

}  // namespace navsim
