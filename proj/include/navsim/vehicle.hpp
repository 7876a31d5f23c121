#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "navsim/errors.hpp"
#include "navsim/geometry.hpp"

namespace navsim {

constexpr uint16_t kPwmMin = 1000;
constexpr uint16_t kPwmNeutral = 1500;
constexpr uint16_t kPwmMax = 2000;

/// The nine-field command message: four control channels, four AUX channels,
/// and the drone index used for routing.
struct CommandMessage {
    uint16_t rc_roll = kPwmNeutral;
    uint16_t rc_pitch = kPwmNeutral;
    uint16_t rc_yaw = kPwmNeutral;
    uint16_t rc_throttle = kPwmNeutral;
    uint16_t rc_aux1 = kPwmNeutral;
    uint16_t rc_aux2 = kPwmNeutral;
    uint16_t rc_aux3 = kPwmNeutral;
    uint16_t rc_aux4 = kPwmNeutral;
    int drone_index = 0;

    CommandMessage& clamp();
    bool operator==(const CommandMessage&) const = default;
};

uint16_t clamp_pwm(int value);

// AUX4 at or above this arms the drone; below disarms (the reference disarm
// message uses rcAUX4 = 1200).
constexpr uint16_t kArmThreshold = 1300;

struct DroneParams {
    double tau_attitude_s = 0.1;       // first-order attitude lag
    double max_tilt_rad = 30.0 * M_PI / 180.0;
    double hover_pwm = 1550.0;
    double k_throttle = 0.004;         // m/s per PWM count
    double drag_coeff = 0.3;           // 1/s, linear horizontal drag
    double gravity = 9.81;
};

/// Velocity-bias random walk applied to the drone's self-estimate only.
/// Truth dynamics stay drift-free.
struct DriftModel {
    double velocity_walk_std = 0.0;    // m/s per sqrt(s), per horizontal axis
    double altitude_rate = 0.0;        // m/s deterministic altitude bias
    uint64_t seed = 0;
    bool enabled = false;

    Vec3 bias_velocity = Vec3::Zero();

    void reset();
    void advance(double dt);

private:
    std::mt19937_64 rng_;
};

struct DroneState {
    Vec3 position = Vec3::Zero();      // world meters, truth
    Vec3 velocity = Vec3::Zero();      // world m/s, truth
    double roll = 0.0;                 // phi, radians
    double pitch = 0.0;                // theta, radians
    double yaw = 0.0;                  // psi, held constant by internal control
    double battery_volts = 3.7;
    bool armed = false;
    int index = 0;

    Vec3 estimate = Vec3::Zero();      // dead-reckoned self-estimate, world meters

    // Set when a step was commanded while disarmed; cleared on the next
    // armed step.
    bool rejected_command = false;
};

/// Advance the drone by dt in (0, 0.05]. Attitude follows the PWM-mapped
/// command through a first-order lag; horizontal acceleration is g*tan(tilt)
/// minus linear drag; vertical velocity is k_t*(throttle - hover). Drift,
/// when enabled, accumulates into the self-estimate only.
DroneState step_drone(const DroneState& s, const CommandMessage& cmd, double dt,
                      DriftModel& drift, const DroneParams& params = {});

/// Apply AUX channel semantics (arm/disarm) without advancing dynamics.
DroneState apply_aux(const DroneState& s, const CommandMessage& cmd);

/// Differential-drive landing target confined to a 2D plane.
struct PlatformState {
    Vec3 position = Vec3::Zero();      // world meters; z fixed to deck height
    double heading = 0.0;              // radians
    double speed = 0.0;                // m/s, constant
    std::vector<Vec2> path;            // closed polyline, world xy meters
    double deck_height = 0.15;         // z of the marker deck
    double arc_position = 0.0;         // arc length along the path
};

/// Place the platform on its path start and derive position/heading.
PlatformState init_platform(std::vector<Vec2> path, double speed, double deck_height);

/// Advance arc length by speed*dt along the closed polyline.
PlatformState step_platform(const PlatformState& p, double dt);

}  // namespace navsim
