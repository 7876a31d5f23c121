#include "navsim/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace navsim {

uint16_t clamp_pwm(int value) {
    if (value < kPwmMin) return kPwmMin;
    if (value > kPwmMax) return kPwmMax;
    return static_cast<uint16_t>(value);
}

CommandMessage& CommandMessage::clamp() {
    rc_roll = clamp_pwm(rc_roll);
    rc_pitch = clamp_pwm(rc_pitch);
    rc_yaw = clamp_pwm(rc_yaw);
    rc_throttle = clamp_pwm(rc_throttle);
    rc_aux1 = clamp_pwm(rc_aux1);
    rc_aux2 = clamp_pwm(rc_aux2);
    rc_aux3 = clamp_pwm(rc_aux3);
    rc_aux4 = clamp_pwm(rc_aux4);
    return *this;
}

void DriftModel::reset() {
    rng_.seed(seed);
    bias_velocity = Vec3::Zero();
    bias_velocity.z() = enabled ? altitude_rate : 0.0;
}

void DriftModel::advance(double dt) {
    if (!enabled) {
        return;
    }
    std::normal_distribution<double> walk(0.0, velocity_walk_std * std::sqrt(dt));
    bias_velocity.x() += walk(rng_);
    bias_velocity.y() += walk(rng_);
    // Altitude bias is a deterministic rate plus the same walk.
    bias_velocity.z() += walk(rng_);
}

DroneState apply_aux(const DroneState& s, const CommandMessage& cmd) {
    DroneState out = s;
    out.armed = cmd.rc_aux4 >= kArmThreshold;
    return out;
}

DroneState step_drone(const DroneState& s, const CommandMessage& cmd, double dt,
                      DriftModel& drift, const DroneParams& params) {
    if (!(dt > 0.0) || dt > 0.05) {
        throw std::invalid_argument("step_drone: dt must be in (0, 0.05]");
    }

    DroneState out = s;
    if (!s.armed) {
        // Motors inert: no translation, attitude relaxes to level.
        const double decay = std::exp(-dt / params.tau_attitude_s);
        out.roll *= decay;
        out.pitch *= decay;
        out.velocity = Vec3::Zero();
        out.rejected_command = true;
        return out;
    }
    out.rejected_command = false;

    CommandMessage c = cmd;
    c.clamp();

    const double roll_cmd = (static_cast<double>(c.rc_roll) - kPwmNeutral) / 500.0
                          * params.max_tilt_rad;
    const double pitch_cmd = (static_cast<double>(c.rc_pitch) - kPwmNeutral) / 500.0
                           * params.max_tilt_rad;

    // Exact first-order response over the step.
    const double decay = std::exp(-dt / params.tau_attitude_s);
    out.roll = roll_cmd + (s.roll - roll_cmd) * decay;
    out.pitch = pitch_cmd + (s.pitch - pitch_cmd) * decay;
    out.roll = std::clamp(out.roll, -params.max_tilt_rad, params.max_tilt_rad);
    out.pitch = std::clamp(out.pitch, -params.max_tilt_rad, params.max_tilt_rad);

    // Pitch moves x, roll moves y (overhead-frame convention).
    const double ax = params.gravity * std::tan(out.pitch) - params.drag_coeff * s.velocity.x();
    const double ay = params.gravity * std::tan(out.roll) - params.drag_coeff * s.velocity.y();

    out.velocity.x() = s.velocity.x() + ax * dt;
    out.velocity.y() = s.velocity.y() + ay * dt;
    out.velocity.z() = params.k_throttle * (static_cast<double>(c.rc_throttle) - params.hover_pwm);

    out.position = s.position + out.velocity * dt;

    drift.advance(dt);
    const Vec3 est_velocity = out.velocity + drift.bias_velocity;
    out.estimate = s.estimate + est_velocity * dt;

    return out;
}

namespace {

double polyline_length(const std::vector<Vec2>& path) {
    double len = 0.0;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        len += (path[i + 1] - path[i]).norm();
    }
    // Closing segment.
    len += (path.front() - path.back()).norm();
    return len;
}

// Position and heading at arc length s along the closed polyline.
void sample_path(const std::vector<Vec2>& path, double s, Vec2& pos, double& heading) {
    const size_t n = path.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = path[i];
        const Vec2& b = path[(i + 1) % n];
        const double seg = (b - a).norm();
        if (seg <= 0.0) {
            continue;
        }
        if (s <= seg) {
            const Vec2 dir = (b - a) / seg;
            pos = a + dir * s;
            heading = std::atan2(dir.y(), dir.x());
            return;
        }
        s -= seg;
    }
    pos = path.front();
    heading = 0.0;
}

}  // namespace

PlatformState init_platform(std::vector<Vec2> path, double speed, double deck_height) {
    if (path.size() < 2) {
        throw EmptyPath("platform path needs at least 2 points");
    }
    PlatformState p;
    p.path = std::move(path);
    p.speed = speed;
    p.deck_height = deck_height;
    p.arc_position = 0.0;
    Vec2 pos;
    sample_path(p.path, 0.0, pos, p.heading);
    p.position = Vec3(pos.x(), pos.y(), deck_height);
    return p;
}

PlatformState step_platform(const PlatformState& p, double dt) {
    if (p.path.size() < 2) {
        throw EmptyPath("platform path needs at least 2 points");
    }
    PlatformState out = p;
    const double total = polyline_length(p.path);
    out.arc_position = std::fmod(p.arc_position + p.speed * dt, total);
    if (out.arc_position < 0.0) {
        out.arc_position += total;
    }
    Vec2 pos;
    sample_path(out.path, out.arc_position, pos, out.heading);
    out.position = Vec3(pos.x(), pos.y(), p.deck_height);
    return out;
}

}  // namespace navsim
