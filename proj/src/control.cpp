#include "navsim/control.hpp"

#include <algorithm>
#include <cmath>

namespace navsim {

PidGains PidGains::from_time_constants(double kp, double ti, double td) {
    PidGains g;
    g.kp = kp;
    g.ki = ti > 0.0 ? kp / ti : 0.0;
    g.kd = kp * td;
    return g;
}

double PidGains::integral_time() const { return ki > 0.0 ? kp / ki : 0.0; }
double PidGains::derivative_time() const { return kp > 0.0 ? kd / kp : 0.0; }

double pid_step(const PidGains& gains, PidState& state, double error, double dt) {
    const double prev = state.has_prev ? state.prev_error : error;

    state.integral += 0.5 * (error + prev) * dt;
    if (gains.ki > 0.0) {
        // Anti-windup: the integral term alone never exceeds the output limit.
        const double bound = state.output_limit / gains.ki;
        state.integral = std::clamp(state.integral, -bound, bound);
    }

    const double derivative = state.has_prev ? (error - prev) / dt : 0.0;

    state.prev_error = error;
    state.has_prev = true;

    const double u = gains.kp * error + gains.ki * state.integral + gains.kd * derivative;
    return std::clamp(u, -state.output_limit, state.output_limit);
}

LoopTiming compute_sample_time(double fps, double pid_time_s, double buffer_s) {
    if (fps <= 0.0) {
        throw NonPositiveFps("compute_sample_time: fps must be positive");
    }
    if (pid_time_s < 0.0 || buffer_s < 0.0) {
        throw NonPositiveFps("compute_sample_time: negative loop component");
    }
    return LoopTiming{fps, pid_time_s, buffer_s};
}

PositionController::Output PositionController::update(const WhyConPose& current,
                                                      const Setpoint& sp, double now,
                                                      double dt) {
    Output out;
    const double st = timing.sample_time();
    if (now - current.timestamp > 2.0 * st) {
        out.stale = true;
        out.command = CommandMessage{};  // neutral
        return out;
    }

    out.error = Vec3(current.x - sp.x, current.y - sp.y, current.z - sp.z);
    const double ux = pid_step(gains_x, state_x, out.error.x(), dt);
    const double uy = pid_step(gains_y, state_y, out.error.y(), dt);
    const double uz = pid_step(gains_z, state_z, out.error.z(), dt);

    CommandMessage cmd;
    cmd.rc_pitch = clamp_pwm(kPwmNeutral + static_cast<int>(std::lround(signs.pitch * ux)));
    cmd.rc_roll = clamp_pwm(kPwmNeutral + static_cast<int>(std::lround(signs.roll * uy)));
    cmd.rc_throttle =
        clamp_pwm(kPwmNeutral + static_cast<int>(std::lround(signs.throttle * uz)));
    cmd.rc_yaw = kPwmNeutral;
    out.command = cmd;
    return out;
}

void PositionController::reset() {
    state_x.reset();
    state_y.reset();
    state_z.reset();
}

WaypointScheduler::WaypointScheduler(std::vector<Setpoint> waypoints,
                                     double arrival_tolerance, double dwell_s)
    : waypoints_(std::move(waypoints)), tolerance_(arrival_tolerance), dwell_(dwell_s) {
    if (waypoints_.empty()) {
        throw EmptyWaypointList("waypoint scheduler needs at least one waypoint");
    }
}

std::optional<WaypointScheduler::Transition> WaypointScheduler::update(const WhyConPose& pose,
                                                                       double now) {
    if (finished_) {
        return std::nullopt;
    }
    const Setpoint& sp = waypoints_[index_];
    const double err = (pose.vec() - sp.vec()).norm();
    if (err < tolerance_) {
        if (!inside_since_) {
            inside_since_ = now;
        }
        if (now - *inside_since_ >= dwell_) {
            inside_since_.reset();
            if (index_ + 1 < waypoints_.size()) {
                ++index_;
                Transition tr{static_cast<int>(index_), now};
                transitions_.push_back(tr);
                return tr;
            }
            finished_ = true;
            Transition tr{static_cast<int>(index_), now};
            transitions_.push_back(tr);
            return tr;
        }
    } else {
        inside_since_.reset();
    }
    return std::nullopt;
}

RelayTuneResult relay_tune(SisoPlant& plant, double setpoint, const RelayTuneOptions& opts) {
    const double d = opts.relay_amplitude;
    double y = plant.read();
    double u = y < setpoint ? d : -d;

    struct Cycle {
        double period;
        double half_peak_to_peak;
    };
    std::vector<Cycle> cycles;
    std::vector<double> up_cross_times;
    double seg_min = y;
    double seg_max = y;
    double prev_min = 0.0;
    bool have_prev_min = false;

    const int needed = opts.cycles + opts.discard_cycles;
    double t = 0.0;
    bool above = y > setpoint;

    while (t < opts.timeout_s) {
        y = plant.step(u, opts.dt);
        t += opts.dt;
        seg_min = std::min(seg_min, y);
        seg_max = std::max(seg_max, y);

        if (!above && y > setpoint + opts.hysteresis) {
            // Upward crossing: the relay flips to minimum output.
            above = true;
            u = -d;
            up_cross_times.push_back(t);
            if (up_cross_times.size() >= 2 && have_prev_min) {
                const size_t k = up_cross_times.size();
                Cycle c;
                c.period = up_cross_times[k - 1] - up_cross_times[k - 2];
                c.half_peak_to_peak = 0.5 * (seg_max - prev_min);
                cycles.push_back(c);
            }
            prev_min = seg_min;
            have_prev_min = true;
            seg_min = y;
            seg_max = y;
        } else if (above && y < setpoint - opts.hysteresis) {
            above = false;
            u = d;
            // Track the minimum of the downward half-cycle.
            seg_min = std::min(seg_min, y);
        }

        if (static_cast<int>(cycles.size()) >= needed) {
            break;
        }
    }

    if (static_cast<int>(cycles.size()) < needed) {
        throw NoOscillation("relay_tune: insufficient setpoint crossings before timeout");
    }

    // Mean over the last three oscillations.
    double a = 0.0;
    double tu = 0.0;
    const int tail = 3;
    for (int i = 0; i < tail; ++i) {
        const Cycle& c = cycles[cycles.size() - 1 - i];
        a += c.half_peak_to_peak;
        tu += c.period;
    }
    a /= tail;
    tu /= tail;

    RelayTuneResult result;
    result.relay_amplitude = d;
    result.oscillation_amplitude = a;
    result.ultimate_period = tu;
    result.ultimate_gain = 4.0 * d / (M_PI * a);
    return result;
}

ControllerType parse_controller_type(const std::string& name) {
    if (name == "P") return ControllerType::P;
    if (name == "PI") return ControllerType::PI;
    if (name == "PD") return ControllerType::PD;
    if (name == "Classic PID" || name == "classic_pid") return ControllerType::ClassicPid;
    if (name == "Pessen Integral rule" || name == "pessen") {
        return ControllerType::PessenIntegralRule;
    }
    if (name == "Some overshoot" || name == "some_overshoot") {
        return ControllerType::SomeOvershoot;
    }
    if (name == "No overshoot" || name == "no_overshoot") return ControllerType::NoOvershoot;
    throw UnknownControllerType("unknown controller type: " + name);
}

PidGains zn_gains(double ku, double tu, ControllerType type) {
    double kp = 0.0;
    double ti = 0.0;  // 0 means no integral term
    double td = 0.0;
    switch (type) {
        case ControllerType::P:
            kp = 0.5 * ku;
            break;
        case ControllerType::PI:
            kp = 0.5 * ku;
            ti = tu / 1.25;
            break;
        case ControllerType::PD:
            kp = 0.8 * ku;
            td = tu / 8.0;
            break;
        case ControllerType::ClassicPid:
            kp = 0.6 * ku;
            ti = tu / 2.0;
            td = tu / 8.0;
            break;
        case ControllerType::PessenIntegralRule:
            kp = 0.7 * ku;
            ti = tu / 2.5;
            td = 3.0 * tu / 20.0;
            break;
        case ControllerType::SomeOvershoot:
            kp = 0.33 * ku;
            ti = tu / 2.0;
            td = tu / 3.0;
            break;
        case ControllerType::NoOvershoot:
            kp = 0.2 * ku;
            ti = tu / 2.0;
            td = tu / 3.0;
            break;
    }
    return PidGains::from_time_constants(kp, ti, td);
}

PidGains zn_gains(const RelayTuneResult& result, ControllerType type) {
    return zn_gains(result.ultimate_gain, result.ultimate_period, type);
}

namespace {

// Steps a gain, throwing RangeExhausted when the step would leave the range.
void step_gain(double& value, double delta, const GainRange& range, const char* name) {
    const double next = value + delta;
    if (next < range.min - 1e-12 || next > range.max + 1e-12) {
        throw RangeExhausted(std::string("iterative_autotune: ") + name
                             + " left its range before convergence");
    }
    value = std::clamp(next, range.min, range.max);
}

double kd_step_magnitude(double base_step, double envelope_slope) {
    // Step scales with the envelope slope, clamped to keep progress bounded.
    const double mag = std::clamp(std::abs(envelope_slope), 0.1, 1.0);
    return base_step * mag;
}

}  // namespace

IterativeTuneResult iterative_autotune(AutotunePlant& plant, const IterativeTuneOptions& opts) {
    std::array<PidGains, 3> gains;
    const auto& r = opts.ranges;
    // Phi and theta start at range minimum; throttle Kp starts at maximum.
    for (int axis : {0, 1}) {
        gains[axis].kp = r[axis].kp.min;
        gains[axis].ki = r[axis].ki.min;
        gains[axis].kd = r[axis].kd.min;
    }
    gains[2].kp = r[2].kp.max;
    gains[2].ki = r[2].ki.min;
    gains[2].kd = r[2].kd.min;

    std::array<PidGains, 3> last_stable = gains;
    IterativeTuneResult result;

    auto evaluate = [&](const std::array<PidGains, 3>& g) {
        auto metrics = plant.evaluate(g);
        for (const auto& m : metrics) {
            if (m.peak_error > opts.safety_peak) {
                throw Unstable("iterative_autotune: oscillation exceeded safety bound",
                               last_stable);
            }
        }
        last_stable = g;
        return metrics;
    };

    auto any_error_at_least = [](const std::array<TrialMetrics, 3>& m, double bound) {
        return m[0].steady_error >= bound || m[1].steady_error >= bound
            || m[2].steady_error >= bound;
    };

    auto metrics = evaluate(gains);

    // Loop 1: proportional sweep until the error clears `threshold` everywhere.
    int iters = 0;
    while (any_error_at_least(metrics, opts.threshold)) {
        if (++iters > opts.max_iterations) {
            throw RangeExhausted("iterative_autotune: loop 1 iteration cap reached");
        }
        step_gain(gains[0].kp, opts.kp_step, r[0].kp, "phi.kp");
        step_gain(gains[1].kp, opts.kp_step, r[1].kp, "theta.kp");
        step_gain(gains[2].kp, -opts.kp_step, r[2].kp, "throttle.kp");
        metrics = evaluate(gains);
    }
    result.loop1_iterations = iters;

    // Loop 2: derivative damping plus integral action until `threshold_prime`.
    iters = 0;
    while (any_error_at_least(metrics, opts.threshold_prime)) {
        if (++iters > opts.max_iterations) {
            throw RangeExhausted("iterative_autotune: loop 2 iteration cap reached");
        }
        for (int axis = 0; axis < 3; ++axis) {
            const TrialMetrics& m = metrics[axis];
            if (m.envelope >= opts.threshold) {
                const double step = kd_step_magnitude(opts.kd_step, m.envelope_slope);
                const double delta = m.overdamped ? -step : step;
                step_gain(gains[axis].kd, delta, r[axis].kd,
                          axis == 0 ? "phi.kd" : axis == 1 ? "theta.kd" : "throttle.kd");
            }
            if (m.steady_error >= opts.threshold_prime) {
                step_gain(gains[axis].ki, opts.ki_step, r[axis].ki,
                          axis == 0 ? "phi.ki" : axis == 1 ? "theta.ki" : "throttle.ki");
            }
        }
        metrics = evaluate(gains);
    }
    result.loop2_iterations = iters;
    result.gains = gains;
    return result;
}

}  // namespace navsim
