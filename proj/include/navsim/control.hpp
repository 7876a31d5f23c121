#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "navsim/errors.hpp"
#include "navsim/geometry.hpp"
#include "navsim/vehicle.hpp"

namespace navsim {

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;

    // (Kp, Ti, Td) parameterization: Ki = Kp/Ti, Kd = Kp*Td.
    static PidGains from_time_constants(double kp, double ti, double td);
    double integral_time() const;    // Ti = Kp/Ki
    double derivative_time() const;  // Td = Kd/Kp
};

struct PidState {
    double integral = 0.0;       // error * seconds
    double prev_error = 0.0;     // WhyCon units
    bool has_prev = false;
    double output_limit = 500.0; // PWM offset from neutral

    void reset() {
        integral = 0.0;
        prev_error = 0.0;
        has_prev = false;
    }
};

/// One PID update: Kp*e + Ki*int(e) + Kd*de/dt, trapezoidal integral,
/// backward-difference derivative on error, output and integral clamped
/// (anti-windup holds |Ki*I| at or below the output limit).
double pid_step(const PidGains& gains, PidState& state, double error, double dt);

/// Sample time per the worst-case loop delay: ST = 1/FPS + PID_time + buffer.
struct LoopTiming {
    double fps = 120.0;
    double pid_time_s = 0.1;
    double buffer_s = 0.01;

    double sample_time() const { return 1.0 / fps + pid_time_s + buffer_s; }
};

LoopTiming compute_sample_time(double fps, double pid_time_s, double buffer_s);

/// Hold target in WhyCon units.
struct Setpoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 vec() const { return {x, y, z}; }
};

/// Per-axis feedback sense: the sign applied to the PID output before adding
/// it to the neutral PWM. Defaults match the overhead camera convention
/// (WhyCon x runs against world x, y with it, z away from the camera).
struct AxisSigns {
    double pitch = 1.0;     // x-axis error -> rcPitch
    double roll = -1.0;     // y-axis error -> rcRoll
    double throttle = 1.0;  // z-axis error -> rcThrottle
};

struct PositionController {
    PidGains gains_x;  // pitch axis
    PidGains gains_y;  // roll axis
    PidGains gains_z;  // throttle axis
    PidState state_x;
    PidState state_y;
    PidState state_z;
    AxisSigns signs;
    LoopTiming timing;

    struct Output {
        CommandMessage command;
        bool stale = false;
        Vec3 error = Vec3::Zero();  // (x-X̄, y-Ȳ, z-Z̄) fed to the PIDs
    };

    /// Three parallel PID steps on (x-X̄, y-Ȳ, z-Z̄) mapped to rcPitch,
    /// rcRoll, rcThrottle; rcYaw stays neutral. A pose older than 2*ST
    /// produces a neutral command flagged stale.
    Output update(const WhyConPose& current, const Setpoint& sp, double now, double dt);

    void reset();
};

/// Steps through an ordered waypoint list; advances after the error norm has
/// stayed under the arrival tolerance for the dwell time.
class WaypointScheduler {
public:
    struct Transition {
        int waypoint_index = 0;  // index now active
        double time = 0.0;
    };

    WaypointScheduler(std::vector<Setpoint> waypoints, double arrival_tolerance,
                      double dwell_s);

    const Setpoint& current() const { return waypoints_[index_]; }
    size_t current_index() const { return index_; }
    bool finished() const { return finished_; }
    const std::vector<Transition>& transitions() const { return transitions_; }

    /// Feed the latest pose; returns the transition if one fired.
    std::optional<Transition> update(const WhyConPose& pose, double now);

private:
    std::vector<Setpoint> waypoints_;
    double tolerance_;
    double dwell_;
    size_t index_ = 0;
    bool finished_ = false;
    std::optional<double> inside_since_;
    std::vector<Transition> transitions_;
};

/// Single-input single-output plant abstraction for the tuning procedures:
/// apply actuation u for dt seconds, read back the controlled variable.
class SisoPlant {
public:
    virtual ~SisoPlant() = default;
    virtual double step(double u, double dt) = 0;
    virtual double read() const = 0;
};

struct RelayTuneResult {
    double ultimate_gain = 0.0;    // Ku = 4d / (pi * a)
    double ultimate_period = 0.0;  // Tu, seconds
    double relay_amplitude = 0.0;  // d, actuation units
    double oscillation_amplitude = 0.0;  // a, WhyCon units
};

struct RelayTuneOptions {
    double relay_amplitude = 100.0;  // d
    int cycles = 5;                  // required setpoint oscillations
    int discard_cycles = 2;          // transients dropped before measuring
    double dt = 0.005;
    double timeout_s = 120.0;
    double hysteresis = 0.0;         // deadband around the setpoint
};

/// Relay (bang-bang) excitation: drive the plant at +d until the output
/// crosses the setpoint, then -d, and so on. Ku and Tu come from the last
/// three oscillations. Throws NoOscillation if the plant never cycles.
RelayTuneResult relay_tune(SisoPlant& plant, double setpoint, const RelayTuneOptions& opts);

enum class ControllerType {
    P,
    PI,
    PD,
    ClassicPid,
    PessenIntegralRule,
    SomeOvershoot,
    NoOvershoot,
};

ControllerType parse_controller_type(const std::string& name);

/// Ziegler-Nichols gain table. Rows are (Kp, Ti, Td) factors of (Ku, Tu);
/// missing entries leave the corresponding gain at zero.
PidGains zn_gains(const RelayTuneResult& result, ControllerType type);
PidGains zn_gains(double ku, double tu, ControllerType type);

// ---- Iterative feedback auto-tuning ----

struct GainRange {
    double min = 0.0;
    double max = 0.0;
};

struct AxisRanges {
    GainRange kp;
    GainRange ki;
    GainRange kd;
};

enum class TuneAxis { Phi = 0, Theta = 1, Throttle = 2 };

/// What one evaluation flight reports per axis.
struct TrialMetrics {
    double steady_error = 0.0;    // |error| over the tail of the trial
    double envelope = 0.0;        // err_max - err_min after the transient
    double envelope_slope = 0.0;  // envelope growth rate, units/s
    bool overdamped = false;      // no setpoint crossing within one period
    double peak_error = 0.0;      // safety monitor
};

/// Plant abstraction for iterative tuning: run one trial with the candidate
/// gains and report the per-axis response metrics.
class AutotunePlant {
public:
    virtual ~AutotunePlant() = default;
    virtual std::array<TrialMetrics, 3> evaluate(const std::array<PidGains, 3>& gains) = 0;
};

struct IterativeTuneOptions {
    std::array<AxisRanges, 3> ranges;  // phi, theta, throttle
    double threshold = 1.0;            // loop-1 exit, WhyCon units
    double threshold_prime = 0.5;      // loop-2 exit
    double kp_step = 0.1;
    double ki_step = 0.5;
    double kd_step = 0.05;
    double safety_peak = 20.0;         // abort when any trial peak exceeds this
    int max_iterations = 500;
};

struct Unstable : Error {
    Unstable(const std::string& msg, std::array<PidGains, 3> last_stable)
        : Error(msg), last_stable_gains(last_stable) {}
    std::array<PidGains, 3> last_stable_gains;
};

struct IterativeTuneResult {
    std::array<PidGains, 3> gains;  // phi, theta, throttle
    int loop1_iterations = 0;
    int loop2_iterations = 0;
};

/// Iterative feedback auto-tuning. Phi/theta start all gains at range
/// minimum; throttle starts Kp at maximum. Loop 1 walks Kp by 0.1 until the
/// error is under `threshold` on every axis; loop 2 adjusts Kd from the
/// damping classification and bumps Ki by 0.5 on axes whose error persists,
/// until every axis is under `threshold_prime`. Throws RangeExhausted when a
/// gain would leave its range and Unstable when a trial exceeds the safety
/// peak.
IterativeTuneResult iterative_autotune(AutotunePlant& plant, const IterativeTuneOptions& opts);

}  // namespace navsim
