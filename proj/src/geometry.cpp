#include "navsim/geometry.hpp"

#include <cmath>

namespace navsim {

HomogeneousTransform HomogeneousTransform::rotation_y_180(const Vec3& t) {
    HomogeneousTransform out;
    // cos(180)=-1, sin(180)=0: flips x and z, keeps y.
    out.rotation << -1, 0, 0,
                     0, 1, 0,
                     0, 0, -1;
    out.translation = t;
    return out;
}

Eigen::Matrix4d HomogeneousTransform::matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    m(3, 3) = 1.0;
    return m;
}

HomogeneousTransform HomogeneousTransform::inverse() const {
    HomogeneousTransform out;
    out.rotation = rotation.transpose();
    out.translation = -(rotation.transpose() * translation);
    return out;
}

HomogeneousTransform HomogeneousTransform::compose(const HomogeneousTransform& other) const {
    // this ∘ other: apply `other` first, then `this`.
    HomogeneousTransform out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
}

bool HomogeneousTransform::rotation_is_orthonormal(double tol) const {
    Mat3 should_be_identity = rotation.transpose() * rotation;
    return (should_be_identity - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
}

Vec3 apply_transform(const HomogeneousTransform& t, const Vec3& p) {
    return t.rotation * p + t.translation;
}

Vec2 distort(const CameraModel& cam, const Vec2& normalized) {
    const double r2 = normalized.squaredNorm();
    const double factor = 1.0 + cam.k1 * r2 + cam.k2 * r2 * r2;
    return normalized * factor;
}

Vec2 undistort(const CameraModel& cam, const Vec2& distorted) {
    if (cam.k1 == 0.0 && cam.k2 == 0.0) {
        return distorted;
    }
    const double tol = 1e-9;
    const int max_iter = 50;
    Vec2 p = distorted;
    for (int i = 0; i < max_iter; ++i) {
        const double r2 = p.squaredNorm();
        const double factor = 1.0 + cam.k1 * r2 + cam.k2 * r2 * r2;
        if (factor <= 0.0 || !std::isfinite(factor)) {
            throw UndistortDiverged("undistort: non-positive radial factor");
        }
        const Vec2 next = distorted / factor;
        if ((next - p).cwiseAbs().maxCoeff() < tol) {
            return next;
        }
        p = next;
    }
    throw UndistortDiverged("undistort: no convergence in 50 iterations");
}

Vec2 project(const CameraModel& cam, const Vec3& world_point) {
    const Vec3 pc = cam.to_camera_frame(world_point);
    if (pc.z() <= 0.0) {
        throw PointBehindCamera("project: camera-frame z <= 0");
    }
    const Vec2 normalized(pc.x() / pc.z(), pc.y() / pc.z());
    const Vec2 d = distort(cam, normalized);
    return {cam.cx + cam.fx * d.x(), cam.cy + cam.fy * d.y()};
}

Vec3 pixel_ray(const CameraModel& cam, const Vec2& pixel) {
    const Vec2 distorted((pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy);
    const Vec2 n = undistort(cam, distorted);
    return {n.x(), n.y(), 1.0};
}

double EllipsoidZCorrection::model_z(double x, double y) const {
    const double arg = 1.0 - (x * x) / (semi_axis_a * semi_axis_a)
                           - (y * y) / (semi_axis_b * semi_axis_b);
    if (arg <= 0.0) {
        throw FitOutOfDomain("ellipsoid: (x,y) outside fitted footprint");
    }
    return apex_z * std::sqrt(arg);
}

namespace {

// Caps keep the flat-data limit (A,B -> inf) representable.
constexpr double kMaxSemiAxis = 1e9;
constexpr double kMinSemiAxis = 1e-9;

double clamp_axis(double v) {
    return std::min(kMaxSemiAxis, std::max(kMinSemiAxis, v));
}

}  // namespace

EllipsoidFit fit_ellipsoid_z(const std::vector<EllipsoidSample>& samples) {
    if (samples.size() < 6) {
        throw DegenerateSamples("fit_ellipsoid_z: need at least 6 samples");
    }
    bool distinct = false;
    for (const auto& s : samples) {
        if (s.x != samples.front().x || s.y != samples.front().y) {
            distinct = true;
            break;
        }
    }
    if (!distinct) {
        throw DegenerateSamples("fit_ellipsoid_z: all samples share one (x,y)");
    }

    // Linear initialization: z^2 = alpha - beta x^2 - gamma y^2.
    const int n = static_cast<int>(samples.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = -samples[i].x * samples[i].x;
        design(i, 2) = -samples[i].y * samples[i].y;
        rhs(i) = samples[i].z_raw * samples[i].z_raw;
    }
    Eigen::Vector3d abc = design.colPivHouseholderQr().solve(rhs);
    const double alpha = abc(0);
    const double beta = std::max(abc(1), 0.0);
    const double gamma = std::max(abc(2), 0.0);
    if (alpha <= 0.0) {
        throw DegenerateSamples("fit_ellipsoid_z: non-positive apex estimate");
    }

    double z0 = std::sqrt(alpha);
    double a = beta > 0.0 ? clamp_axis(std::sqrt(alpha / beta)) : kMaxSemiAxis;
    double b = gamma > 0.0 ? clamp_axis(std::sqrt(alpha / gamma)) : kMaxSemiAxis;

    // Gauss-Newton refinement on r_i = z0*sqrt(1 - x^2/A^2 - y^2/B^2) - z_i.
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        bool in_domain = true;
        for (const auto& s : samples) {
            const double arg = 1.0 - (s.x * s.x) / (a * a) - (s.y * s.y) / (b * b);
            if (arg <= 0.0) {
                in_domain = false;
                break;
            }
            const double root = std::sqrt(arg);
            const double r = z0 * root - s.z_raw;
            Eigen::Vector3d jac;
            jac(0) = z0 * (s.x * s.x) / (a * a * a) / root;  // d/dA
            jac(1) = z0 * (s.y * s.y) / (b * b * b) / root;  // d/dB
            jac(2) = root;                                   // d/dz0
            jtj += jac * jac.transpose();
            jtr += jac * r;
        }
        if (!in_domain) {
            break;  // keep the last in-domain estimate
        }
        // Small Levenberg damping keeps the step sane near the flat limit.
        jtj += 1e-12 * Eigen::Matrix3d::Identity();
        const Eigen::Vector3d step = jtj.ldlt().solve(jtr);
        const double new_a = clamp_axis(a - step(0));
        const double new_b = clamp_axis(b - step(1));
        const double new_z0 = z0 - step(2);
        const bool converged = std::abs(new_a - a) < 1e-12 * std::max(1.0, a)
                            && std::abs(new_b - b) < 1e-12 * std::max(1.0, b)
                            && std::abs(new_z0 - z0) < 1e-12 * std::max(1.0, z0);
        a = new_a;
        b = new_b;
        z0 = new_z0 > 0.0 ? new_z0 : z0;
        if (converged) {
            break;
        }
    }

    EllipsoidFit fit;
    fit.correction = {a, b, z0};

    double ss = 0.0;
    for (const auto& s : samples) {
        const double arg = 1.0 - (s.x * s.x) / (a * a) - (s.y * s.y) / (b * b);
        if (arg <= 0.0) {
            throw FitOutOfDomain("fit_ellipsoid_z: sample outside fitted footprint");
        }
        const double r = z0 * std::sqrt(arg) - s.z_raw;
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

WhyConPose correct_z(const EllipsoidZCorrection& c, const WhyConPose& pose) {
    const double zm = c.model_z(pose.x, pose.y);
    WhyConPose out = pose;
    out.z = pose.z * c.apex_z / zm;
    return out;
}

Vec3 units_to_meters(const WhyConPose& pose, const UnitScale& scale) {
    return units_to_meters(pose.vec(), scale);
}

Vec3 units_to_meters(const Vec3& units, const UnitScale& scale) {
    return units * scale.meters_per_unit;
}

Vec3 meters_to_units(const Vec3& meters, const UnitScale& scale) {
    return meters / scale.meters_per_unit;
}

}  // namespace navsim
