#include "navsim/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "navsim/planning.hpp"

namespace navsim {

using nlohmann::json;

namespace {

Vec3 whycon_to_world(const ScenarioConfig& cfg, const Vec3& units) {
    const CameraModel cam = cfg.camera.model();
    return apply_transform(cam.world_to_camera.inverse(),
                           units_to_meters(units, cfg.unit_scale));
}

json latency_json(const SimWorld& world) {
    const auto ls = world.latency_stats();
    const auto& cfg = world.config();
    return json{{"mean_s", ls.mean_s},
                {"min_s", ls.min_s},
                {"max_s", ls.max_s},
                {"count", ls.count},
                {"budget_s", total_latency(cfg.latency) * 1e-3},
                {"tick_s", std::min(1.0 / cfg.camera.fps, cfg.timing().sample_time())}};
}

json adapt_events_json(const SimWorld& world) {
    json arr = json::array();
    const auto& evs = world.adapt_events();
    const auto& ts = world.adapt_event_times();
    for (size_t i = 0; i < evs.size(); ++i) {
        json e{{"t", ts[i]}, {"n", evs[i].new_count}};
        if (evs[i].removed_id) e["removed_id"] = *evs[i].removed_id;
        if (evs[i].added_id) e["added_id"] = *evs[i].added_id;
        arr.push_back(e);
    }
    return arr;
}

// ---- position hold ----

ScenarioResult run_position_hold(const ScenarioConfig& cfg) {
    SimWorld world(cfg);
    world.run(cfg.duration_s);

    ScenarioResult res;
    res.metrics["metrics"] = metrics_to_json(compute_metrics(world.log()));
    res.metrics["latency"] = latency_json(world);
    res.metrics["seed"] = cfg.seed;

    // Hold envelope from the reference run: roll-axis (y) [-0.9, 0.8],
    // pitch-axis (x) [-0.1, 1.8], altitude (z) [-2.2, 2.0].
    const double lo[3] = {-0.1, -0.9, -2.2};
    const double hi[3] = {1.8, 0.8, 2.0};
    size_t within[3] = {0, 0, 0};
    size_t total = 0;
    bool hard_violation = false;
    for (const auto& row : world.log().rows) {
        if (!row.estimate_valid) {
            continue;
        }
        ++total;
        for (int i = 0; i < 3; ++i) {
            const double e = row.error[i];
            if (e >= lo[i] && e <= hi[i]) {
                ++within[i];
            }
            if (e < 2.0 * lo[i] || e > 2.0 * hi[i]) {
                hard_violation = true;
            }
        }
    }
    bool ok = total > 0 && !hard_violation;
    json frac = json::array();
    for (int i = 0; i < 3; ++i) {
        const double f = total > 0 ? static_cast<double>(within[i]) / total : 0.0;
        frac.push_back(f);
        ok = ok && f >= 0.95;
    }
    res.metrics["envelope_fraction_xyz"] = frac;
    res.metrics["hard_violation"] = hard_violation;
    res.success = ok;
    res.summary = ok ? "hold within envelope" : "hold outside envelope";
    res.log = std::move(world.log());
    return res;
}

// ---- internal-only drift ----

ScenarioResult run_internal_only(const ScenarioConfig& cfg) {
    SimWorld world(cfg);
    for (auto& agent : world.drones()) {
        agent.use_self_estimate = true;
    }
    world.run(cfg.duration_s);

    const auto m = compute_metrics(world.log());
    Vec3 max_truth_err = Vec3::Zero();
    for (const auto& row : world.log().rows) {
        if (m.out_of_frame_time_s >= 0.0 && row.t > m.out_of_frame_time_s) {
            break;
        }
        for (int i = 0; i < 3; ++i) {
            max_truth_err[i] =
                std::max(max_truth_err[i], std::abs(row.truth[i] - row.setpoint[i]));
        }
    }

    ScenarioResult res;
    res.metrics["metrics"] = metrics_to_json(m);
    res.metrics["out_of_frame_time_s"] = m.out_of_frame_time_s;
    res.metrics["max_truth_error_pre_exit"] = {max_truth_err.x(), max_truth_err.y(),
                                               max_truth_err.z()};
    res.metrics["seed"] = cfg.seed;
    const bool exited = m.out_of_frame_time_s >= 0.0;
    const bool diverged = max_truth_err.maxCoeff() >= 3.0;
    res.success = exited && diverged;
    res.summary = exited ? "drifted out of frame" : "stayed in frame";
    res.log = std::move(world.log());
    return res;
}

// ---- waypoint navigation ----

ScenarioResult run_waypoint_nav(const ScenarioConfig& cfg) {
    SimWorld world(cfg);
    WaypointScheduler sched(cfg.waypoint_nav.waypoints, cfg.waypoint_nav.arrival_tolerance,
                            cfg.waypoint_nav.dwell_s);

    SimWorld::Hooks hooks;
    hooks.pre_control = [&](SimWorld& w, double t) {
        auto& agent = w.drones()[0];
        if (auto pose = w.tracked_pose(agent.tracker_id)) {
            if (auto tr = sched.update(*pose, t)) {
                w.queue_event("waypoint:" + std::to_string(tr->waypoint_index));
            }
        }
        agent.setpoint = sched.current();
    };
    hooks.stop = [&](SimWorld&, double) { return sched.finished(); };
    world.run(cfg.duration_s, hooks);

    ScenarioResult res;
    res.metrics["metrics"] = metrics_to_json(compute_metrics(world.log()));
    json transitions = json::array();
    for (const auto& tr : sched.transitions()) {
        transitions.push_back({{"index", tr.waypoint_index}, {"t", tr.time}});
    }
    res.metrics["transitions"] = transitions;
    res.metrics["seed"] = cfg.seed;
    res.success = sched.finished();
    res.summary = res.success ? "all waypoints reached" : "waypoints incomplete";
    res.log = std::move(world.log());
    return res;
}

// ---- relay (Ziegler-Nichols) tuning ----

// Presents one control axis of the simulated drone as a positive-gain SISO
// plant. The relay drives the tuned channel directly while the other two
// axes stay under their hold PIDs.
class SimAxisPlant : public SisoPlant {
public:
    SimAxisPlant(SimWorld& world, int axis, const ScenarioConfig& cfg)
        : world_(world), axis_(axis), cfg_(cfg) {
        state_a_.output_limit = 500.0;
        state_b_.output_limit = 500.0;
        if (auto pose = world.tracked_pose(0)) {
            last_value_ = pose->vec()[axis_];
        } else {
            last_value_ = cfg.hold_setpoint.vec()[axis_];
        }
    }

    double step(double u, double dt) override {
        u_ = u;
        SimWorld::Hooks hooks;
        hooks.command_override = [this](SimWorld& w, int idx,
                                        double) -> std::optional<CommandMessage> {
            if (idx != 0) {
                return std::nullopt;
            }
            return make_command(w);
        };
        world_.run(dt, hooks);
        if (auto pose = world_.tracked_pose(0)) {
            last_value_ = pose->vec()[axis_];
        }
        return last_value_;
    }

    double read() const override { return last_value_; }

private:
    CommandMessage make_command(SimWorld& w) {
        CommandMessage cmd;
        const AxisSigns signs;
        const double sign[3] = {signs.pitch, signs.roll, signs.throttle};
        uint16_t* channel[3] = {&cmd.rc_pitch, &cmd.rc_roll, &cmd.rc_throttle};
        const Setpoint& sp = cfg_.hold_setpoint;
        const double st = cfg_.timing().sample_time();

        if (auto pose = w.tracked_pose(0)) {
            int slot = 0;
            for (int ax = 0; ax < 3; ++ax) {
                if (ax == axis_) {
                    continue;
                }
                PidState& state = slot == 0 ? state_a_ : state_b_;
                const PidGains& gains = ax == 0   ? cfg_.gains.x
                                        : ax == 1 ? cfg_.gains.y
                                                  : cfg_.gains.z;
                const double e = pose->vec()[ax] - sp.vec()[ax];
                const double u = pid_step(gains, state, e, st);
                *channel[ax] = clamp_pwm(1500 + static_cast<int>(std::lround(sign[ax] * u)));
                ++slot;
            }
        }
        // Negated so the relay sees a plant whose output rises with +u; the
        // hold PID applies the mirror sign, so Ku carries over unchanged.
        *channel[axis_] =
            clamp_pwm(1500 - static_cast<int>(std::lround(sign[axis_] * u_)));
        cmd.rc_aux4 = 1600;
        return cmd;
    }

    SimWorld& world_;
    int axis_;
    ScenarioConfig cfg_;
    PidState state_a_;
    PidState state_b_;
    double u_ = 0.0;
    double last_value_ = 0.0;
};

ScenarioResult run_zn_autotune(const ScenarioConfig& cfg) {
    SimWorld world(cfg);
    ScenarioResult res;
    res.metrics["seed"] = cfg.seed;

    world.run(8.0);  // settle into the hold before exciting the loop

    RelayTuneOptions opts;
    opts.relay_amplitude = cfg.relay.amplitude;
    opts.cycles = cfg.relay.cycles;
    opts.hysteresis = cfg.relay.hysteresis;
    opts.dt = cfg.timing().sample_time();
    opts.timeout_s = 90.0;

    const char* axis_names[2] = {"pitch_x", "roll_y"};
    RelayTuneResult tune[2];
    try {
        for (int axis = 0; axis < 2; ++axis) {
            SimAxisPlant plant(world, axis, cfg);
            tune[axis] = relay_tune(plant, cfg.hold_setpoint.vec()[axis], opts);
            res.metrics["relay"][axis_names[axis]] = {
                {"ku", tune[axis].ultimate_gain},
                {"tu", tune[axis].ultimate_period},
                {"d", tune[axis].relay_amplitude},
                {"a", tune[axis].oscillation_amplitude}};
            world.run(8.0);  // re-stabilize on the hold gains
        }
    } catch (const NoOscillation& e) {
        res.success = false;
        res.summary = std::string("relay failed: ") + e.what();
        res.log = std::move(world.log());
        return res;
    }

    const ControllerType type = parse_controller_type(cfg.relay.controller_type);
    const PidGains gx = zn_gains(tune[0], type);
    const PidGains gy = zn_gains(tune[1], type);
    res.metrics["gains"]["x"] = {{"kp", gx.kp}, {"ki", gx.ki}, {"kd", gx.kd}};
    res.metrics["gains"]["y"] = {{"kp", gy.kp}, {"ki", gy.ki}, {"kd", gy.kd}};
    res.metrics["controller_type"] = cfg.relay.controller_type;

    auto& agent = world.drones()[0];
    agent.controller.gains_x = gx;
    agent.controller.gains_y = gy;
    agent.controller.reset();
    const size_t hold_start = world.log().rows.size();
    world.run(20.0);

    double max_err = 0.0;
    for (size_t i = hold_start; i < world.log().rows.size(); ++i) {
        const auto& row = world.log().rows[i];
        if (row.estimate_valid && row.t > world.log().rows[hold_start].t + 6.0) {
            max_err = std::max({max_err, std::abs(row.error.x()), std::abs(row.error.y())});
        }
    }
    res.metrics["post_tune_max_xy_error"] = max_err;
    res.success = max_err > 0.0 && max_err < 3.0;
    res.summary = res.success ? "relay tuning stabilized the hold" : "post-tune hold degraded";
    res.log = std::move(world.log());
    return res;
}

// ---- iterative feedback autotune ----

// Each trial flies a fresh, identically-seeded world from a stepped-off
// start, so gain candidates are compared on the same disturbance tape.
class SimTrialPlant : public AutotunePlant {
public:
    explicit SimTrialPlant(const ScenarioConfig& cfg) : base_(cfg) {}

    std::array<TrialMetrics, 3> evaluate(const std::array<PidGains, 3>& gains) override {
        ScenarioConfig c = base_;
        // Algorithm axes are (phi -> y/roll, theta -> x/pitch, throttle -> z).
        c.gains.y = gains[0];
        c.gains.x = gains[1];
        c.gains.z = gains[2];
        const double step = base_.autotune.trial_step_units;
        const Vec3 sp = base_.hold_setpoint.vec();
        c.drones[0].start_position =
            whycon_to_world(base_, sp + Vec3(step, step, step));

        SimWorld world(c);
        world.run(base_.autotune.trial_duration_s);
        last_log_ = std::move(world.log());
        return analyze(last_log_, base_.autotune.trial_duration_s);
    }

    const RunLog& last_log() const { return last_log_; }

    static std::array<TrialMetrics, 3> analyze(const RunLog& log, double duration) {
        std::array<TrialMetrics, 3> out{};
        // Row axis order is x,y,z; algorithm order is phi(y), theta(x), z.
        const int axis_of[3] = {1, 0, 2};
        for (int k = 0; k < 3; ++k) {
            const int axis = axis_of[k];
            TrialMetrics m{};
            double steady_sum = 0.0;
            int steady_n = 0;
            double env_min[2] = {1e30, 1e30};
            double env_max[2] = {-1e30, -1e30};
            bool crossed = false;
            double prev_err = 0.0;
            bool has_prev = false;
            for (const auto& row : log.rows) {
                if (!row.estimate_valid) {
                    continue;
                }
                const double e = row.error[axis];
                m.peak_error = std::max(m.peak_error, std::abs(e));
                if (row.t >= 0.75 * duration) {
                    steady_sum += std::abs(e);
                    ++steady_n;
                }
                if (row.t >= 0.5 * duration) {
                    const int half = row.t >= 0.75 * duration ? 1 : 0;
                    env_min[half] = std::min(env_min[half], e);
                    env_max[half] = std::max(env_max[half], e);
                }
                if (has_prev && row.t < 0.5 * duration && prev_err * e < 0.0) {
                    crossed = true;
                }
                prev_err = e;
                has_prev = true;
            }
            m.steady_error = steady_n > 0 ? steady_sum / steady_n : 1e30;
            const double env0 = env_max[0] > env_min[0] ? env_max[0] - env_min[0] : 0.0;
            const double env1 = env_max[1] > env_min[1] ? env_max[1] - env_min[1] : 0.0;
            m.envelope = std::max(env0, env1);
            m.envelope_slope = (env1 - env0) / std::max(0.25 * duration, 1e-9);
            m.overdamped = !crossed;
            out[k] = m;
        }
        return out;
    }

private:
    ScenarioConfig base_;
    RunLog last_log_;
};

ScenarioResult run_iterative_autotune(const ScenarioConfig& cfg) {
    SimTrialPlant plant(cfg);
    IterativeTuneOptions opts;
    opts.ranges = cfg.autotune.ranges;
    opts.threshold = cfg.autotune.threshold;
    opts.threshold_prime = cfg.autotune.threshold_prime;

    ScenarioResult res;
    res.metrics["seed"] = cfg.seed;
    try {
        const IterativeTuneResult tuned = iterative_autotune(plant, opts);
        const char* names[3] = {"phi", "theta", "throttle"};
        for (int i = 0; i < 3; ++i) {
            res.metrics["gains"][names[i]] = {{"kp", tuned.gains[i].kp},
                                              {"ki", tuned.gains[i].ki},
                                              {"kd", tuned.gains[i].kd}};
        }
        res.metrics["loop1_iterations"] = tuned.loop1_iterations;
        res.metrics["loop2_iterations"] = tuned.loop2_iterations;

        // Verification flight on the tuned gains.
        const auto final_metrics = plant.evaluate(tuned.gains);
        res.log = plant.last_log();
        json steady = json::array();
        bool ok = true;
        for (const auto& m : final_metrics) {
            steady.push_back(m.steady_error);
            ok = ok && m.steady_error < cfg.autotune.threshold_prime;
        }
        res.metrics["steady_errors"] = steady;
        res.success = ok;
        res.summary = ok ? "autotune converged" : "autotune did not reach threshold'";
    } catch (const Unstable& e) {
        res.success = false;
        res.summary = std::string("aborted unstable: ") + e.what();
        res.log = plant.last_log();
    } catch (const RangeExhausted& e) {
        res.success = false;
        res.summary = std::string("aborted: ") + e.what();
        res.log = plant.last_log();
    }
    return res;
}

// ---- moving platform landing ----

struct LandingSupervisor {
    const ScenarioConfig& cfg;
    std::optional<WhyConPose> drone_est;
    std::optional<WhyConPose> platform_est;
    Vec2 platform_vel = Vec2::Zero();  // units/s
    bool vel_valid = false;
    double clearance_units;
    bool descending = false;
    double descent_started = -1.0;

    explicit LandingSupervisor(const ScenarioConfig& c)
        : cfg(c),
          clearance_units(c.landing.approach_clearance_m / c.unit_scale.meters_per_unit) {}

    void ingest(const std::vector<Track>& tracks) {
        std::vector<const Track*> fresh;
        for (const auto& t : tracks) {
            if (t.miss_count == 0) {
                fresh.push_back(&t);
            }
        }
        if (fresh.size() >= 2) {
            if (auto labels = disambiguate_by_z(fresh[0]->pose, fresh[1]->pose)) {
                update_platform(labels->platform);
                drone_est = labels->drone;
            }
            // EqualZ: hold previous labels.
        } else if (fresh.size() == 1) {
            const WhyConPose& p = fresh[0]->pose;
            if (drone_est && platform_est) {
                if (std::abs(p.z - drone_est->z) <= std::abs(p.z - platform_est->z)) {
                    drone_est = p;
                } else {
                    update_platform(p);
                }
            } else if (!drone_est) {
                drone_est = p;
            } else {
                update_platform(p);
            }
        }
    }

    void update_platform(const WhyConPose& p) {
        if (platform_est) {
            const double dt = p.timestamp - platform_est->timestamp;
            if (dt > 1e-6) {
                const Vec2 v((p.x - platform_est->x) / dt, (p.y - platform_est->y) / dt);
                platform_vel = vel_valid ? Vec2(0.75 * platform_vel + 0.25 * v) : v;
                vel_valid = true;
            }
        }
        platform_est = p;
    }

    Setpoint target(double t, double control_dt) {
        Setpoint sp = cfg.hold_setpoint;
        if (!platform_est) {
            return sp;
        }
        // Lead the moving target by the loop latency.
        const double horizon = (t - platform_est->timestamp) + cfg.landing.lead_time_s;
        const Vec2 predicted(platform_est->x + platform_vel.x() * horizon,
                             platform_est->y + platform_vel.y() * horizon);
        sp.x = predicted.x();
        sp.y = predicted.y();

        const bool can_descend = t >= cfg.landing.min_hover_s;
        if (drone_est && can_descend && !descending) {
            const double horiz = std::hypot(drone_est->x - predicted.x(),
                                            drone_est->y - predicted.y());
            if (horiz < cfg.landing.descend_threshold_units) {
                descending = true;
                descent_started = t;
            }
        }
        if (descending) {
            bool hold = false;
            if (drone_est) {
                const double horiz = std::hypot(drone_est->x - predicted.x(),
                                                drone_est->y - predicted.y());
                hold = horiz > 2.0 * cfg.landing.descend_threshold_units;
            }
            if (!hold) {
                clearance_units -= cfg.landing.descent_rate_units * control_dt;
            }
        }
        sp.z = platform_est->z - clearance_units;
        return sp;
    }
};

ScenarioResult run_landing(const ScenarioConfig& cfg, LandingOutcome* outcome_out) {
    SimWorld world(cfg);
    LandingSupervisor supervisor(cfg);
    const double st = cfg.timing().sample_time();

    bool touchdown = false;
    double touchdown_t = -1.0;
    double touchdown_offset = -1.0;
    bool descent_logged = false;

    SimWorld::Hooks hooks;
    hooks.pre_control = [&](SimWorld& w, double t) {
        supervisor.ingest(w.published_tracks());
        auto& agent = w.drones()[0];
        agent.setpoint = supervisor.target(t, st);
        if (supervisor.descending && !descent_logged) {
            descent_logged = true;
            w.queue_event("descent_start");
        }
    };
    hooks.stop = [&](SimWorld& w, double t) {
        if (!supervisor.descending || !w.platform()) {
            return false;
        }
        const auto& drone = w.drones()[0].state;
        const auto& plat = *w.platform();
        if (drone.position.z() <= plat.position.z() + cfg.landing.contact_eps_m) {
            touchdown = true;
            touchdown_t = t;
            touchdown_offset = (Vec2(drone.position.x(), drone.position.y())
                                - Vec2(plat.position.x(), plat.position.y()))
                                   .norm()
                               / cfg.unit_scale.meters_per_unit;
            w.queue_event("touchdown");
            return true;
        }
        return false;
    };

    world.run(cfg.duration_s, hooks);

    LandingOutcome outcome;
    outcome.timed_out = !touchdown;
    outcome.touchdown_offset_units = touchdown_offset;
    outcome.touchdown_time_s = touchdown_t;
    outcome.success = touchdown && touchdown_offset <= 0.5;

    ScenarioResult res;
    res.metrics["seed"] = cfg.seed;
    res.metrics["touchdown"] = touchdown;
    res.metrics["touchdown_t"] = touchdown_t;
    res.metrics["touchdown_offset_units"] = touchdown_offset;
    res.metrics["adapt_events"] = adapt_events_json(world);
    res.metrics["descent_started_t"] = supervisor.descent_started;
    try {
        res.metrics["metrics"] = metrics_to_json(compute_metrics(world.log()));
    } catch (const EmptyLog&) {
    }
    res.success = outcome.success;
    res.summary = outcome.success
                      ? "landed on target"
                      : (outcome.timed_out ? "landing timed out" : "touchdown off target");
    res.log = std::move(world.log());
    if (outcome_out) {
        *outcome_out = outcome;
    }
    return res;
}

// ---- hoop traversal ----

ScenarioResult run_hoop_traversal(const ScenarioConfig& cfg) {
    ScenarioResult res;
    res.metrics["seed"] = cfg.seed;

    const Vec3 start = cfg.hold_setpoint.vec();
    HoopTraversal traversal;
    try {
        traversal = hoop_traversal_plan(cfg.hoop.scene, cfg.hoop.sequence, start,
                                        cfg.hoop.traversal);
    } catch (const Error& e) {
        res.success = false;
        res.summary = std::string("planning failed: ") + e.what();
        return res;
    }

    json plans = json::array();
    std::vector<Setpoint> flight;
    for (const auto& plan : traversal.plans) {
        plans.push_back({{"waypoints", waypoints_to_json(plan.waypoints)},
                         {"cost", plan.cost},
                         {"planning_time_s", plan.planning_time_s},
                         {"iterations", plan.iterations},
                         {"seed", plan.seed}});
        flight.insert(flight.end(), plan.waypoints.begin(), plan.waypoints.end());
    }
    res.metrics["plans"] = plans;
    res.metrics["plan_count"] = traversal.plans.size();

    SimWorld world(cfg);
    WaypointScheduler sched(flight, cfg.hoop.arrival_tolerance, cfg.hoop.dwell_s);
    std::vector<bool> crossed(cfg.hoop.scene.hoops.size(), false);
    std::optional<Vec3> prev_truth;

    SimWorld::Hooks hooks;
    hooks.pre_control = [&](SimWorld& w, double t) {
        auto& agent = w.drones()[0];
        if (auto pose = w.tracked_pose(agent.tracker_id)) {
            // Sweep through as many consecutive waypoints as the tolerance
            // covers this tick.
            for (int guard = 0; guard < 64; ++guard) {
                auto tr = sched.update(*pose, t);
                if (!tr) {
                    break;
                }
            }
        }
        agent.setpoint = sched.current();

        const Vec3 truth = w.world_to_whycon(agent.state.position);
        if (prev_truth) {
            for (size_t i = 0; i < cfg.hoop.scene.hoops.size(); ++i) {
                const Hoop& hoop = cfg.hoop.scene.hoops[i];
                const double a = (*prev_truth - hoop.center).dot(hoop.axis);
                const double b = (truth - hoop.center).dot(hoop.axis);
                if (a * b < 0.0) {
                    const double s = a / (a - b);
                    const Vec3 p = *prev_truth + s * (truth - *prev_truth);
                    const Vec3 radial = (p - hoop.center)
                                        - ((p - hoop.center).dot(hoop.axis)) * hoop.axis;
                    if (radial.norm() < hoop.inner_radius) {
                        if (!crossed[i]) {
                            w.queue_event("hoop:" + std::to_string(i));
                        }
                        crossed[i] = true;
                    }
                }
            }
        }
        prev_truth = truth;
    };
    hooks.stop = [&](SimWorld&, double) { return sched.finished(); };
    world.run(cfg.duration_s, hooks);

    bool all_crossed = true;
    json crossed_json = json::array();
    for (bool c : crossed) {
        crossed_json.push_back(c);
        all_crossed = all_crossed && c;
    }
    res.metrics["hoops_crossed"] = crossed_json;
    res.metrics["waypoints_total"] = flight.size();
    res.metrics["flight_complete"] = sched.finished();
    try {
        res.metrics["metrics"] = metrics_to_json(compute_metrics(world.log()));
    } catch (const EmptyLog&) {
    }
    res.success = sched.finished() && all_crossed;
    res.summary = res.success ? "traversed all hoops" : "traversal incomplete";
    res.log = std::move(world.log());
    return res;
}

// ---- formations ----

ScenarioResult run_formation(const ScenarioConfig& cfg) {
    SimWorld world(cfg);
    const double settle_s = cfg.scenario == ScenarioName::FormationSquare ? 6.0 : 5.0;
    int last_step = -1;

    std::vector<std::vector<Setpoint>> square;
    if (cfg.scenario == ScenarioName::FormationSquare) {
        square = square_formation(cfg.formation.square_side,
                                  Vec3(0.0, 0.0, cfg.formation.z),
                                  static_cast<int>(cfg.drones.size()));
    }

    SimWorld::Hooks hooks;
    hooks.pre_control = [&](SimWorld& w, double t) {
        if (cfg.scenario == ScenarioName::FormationSquare) {
            const int steps_done =
                t < settle_s ? 0
                             : static_cast<int>((t - settle_s) / cfg.formation.square_period_s);
            const int idx = steps_done % 4;
            if (steps_done != last_step) {
                last_step = steps_done;
                w.queue_event("square_step:" + std::to_string(steps_done));
            }
            for (auto& agent : w.drones()) {
                agent.setpoint = square[agent.state.index][idx];
            }
        } else {
            const int a =
                t < settle_s
                    ? 0
                    : std::min(36, static_cast<int>((t - settle_s) / cfg.formation.step_period_s));
            if (a != last_step) {
                last_step = a;
                w.queue_event("formation_a:" + std::to_string(a));
            }
            for (auto& agent : w.drones()) {
                FormationParams p;
                p.radius = cfg.formation.radius;
                p.dist_apart = cfg.formation.dist_apart;
                p.wc_id = agent.state.index;
                p.step = a;
                p.center = Vec3(0.0, 0.0, cfg.formation.z);
                agent.setpoint = formation_waypoint(p);
            }
        }
    };
    world.run(cfg.duration_s, hooks);

    ScenarioResult res;
    res.metrics["seed"] = cfg.seed;
    res.metrics["metrics"] = metrics_to_json(compute_metrics(world.log()));

    if (cfg.scenario == ScenarioName::FormationRotation) {
        // Pairwise angular separation from truth positions at each tick.
        std::map<double, std::array<std::optional<double>, 3>> phases;
        for (const auto& row : world.log().rows) {
            if (row.t < 15.0) {
                continue;
            }
            phases[row.t][row.drone_id] =
                std::atan2(row.truth.x(), row.truth.y()) * 180.0 / M_PI;
        }
        size_t ok_ticks = 0;
        size_t total_ticks = 0;
        for (const auto& [t, ph] : phases) {
            if (!ph[0] || !ph[1] || !ph[2]) {
                continue;
            }
            ++total_ticks;
            bool ok = true;
            for (int i = 0; i < 3; ++i) {
                const double d = std::abs(std::remainder(*ph[i] - *ph[(i + 1) % 3], 360.0));
                if (std::abs(d - 120.0) > 10.0) {
                    ok = false;
                }
            }
            if (ok) {
                ++ok_ticks;
            }
        }
        const double frac = total_ticks > 0 ? static_cast<double>(ok_ticks) / total_ticks : 0.0;
        res.metrics["phase_separation_fraction"] = frac;
        res.metrics["steps_completed"] = last_step;
        res.success = last_step >= 36 && frac >= 0.95;
        res.summary = res.success ? "rotation formation held" : "phase separation violated";
    } else if (cfg.scenario == ScenarioName::FormationSquare) {
        // Moving drones must visit every vertex; drone 2 holds the center.
        std::array<std::array<double, 4>, 2> best{};
        for (auto& row : best) row.fill(1e30);
        double worst_center = 0.0;
        const Vec3 center(0.0, 0.0, cfg.formation.z);
        for (const auto& row : world.log().rows) {
            if (row.t < settle_s) {
                continue;
            }
            if (row.drone_id == 2) {
                worst_center = std::max(
                    worst_center, std::hypot(row.truth.x() - center.x(),
                                             row.truth.y() - center.y()));
            } else {
                for (int v = 0; v < 4; ++v) {
                    const auto& sp = square[row.drone_id][v];
                    best[row.drone_id][v] = std::min(
                        best[row.drone_id][v],
                        std::hypot(row.truth.x() - sp.x, row.truth.y() - sp.y));
                }
            }
        }
        bool visited = true;
        for (const auto& drone_best : best) {
            for (double d : drone_best) {
                visited = visited && d <= 0.75;
            }
        }
        res.metrics["vertex_best_distance"] = best;
        res.metrics["center_hold_max"] = worst_center;
        res.metrics["steps_completed"] = last_step;
        res.success = visited && worst_center <= 1.0 && last_step >= 4;
        res.summary = res.success ? "square formation complete" : "square formation failed";
    } else {
        // Circle: finish the 36 arcs with bounded tracking error.
        double max_err = 0.0;
        double sum_err = 0.0;
        size_t n = 0;
        for (const auto& row : world.log().rows) {
            if (row.t < settle_s + 2.0 || !row.estimate_valid) {
                continue;
            }
            const double e = std::hypot(row.error.x(), row.error.y());
            max_err = std::max(max_err, e);
            sum_err += e;
            ++n;
        }
        const double mean_err = n > 0 ? sum_err / n : 1e30;
        res.metrics["tracking_max_error"] = max_err;
        res.metrics["tracking_mean_error"] = mean_err;
        res.metrics["steps_completed"] = last_step;
        res.success = last_step >= 36 && max_err <= 3.0 && mean_err <= 1.2;
        res.summary = res.success ? "circle traversal complete" : "circle traversal failed";
    }
    res.log = std::move(world.log());
    return res;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    switch (cfg.scenario) {
        case ScenarioName::PositionHold: return run_position_hold(cfg);
        case ScenarioName::InternalOnlyDrift: return run_internal_only(cfg);
        case ScenarioName::WaypointNav: return run_waypoint_nav(cfg);
        case ScenarioName::ZnAutotune: return run_zn_autotune(cfg);
        case ScenarioName::IterativeAutotune: return run_iterative_autotune(cfg);
        case ScenarioName::MovingPlatformLanding: return run_landing(cfg, nullptr);
        case ScenarioName::HoopTraversal: return run_hoop_traversal(cfg);
        case ScenarioName::FormationCircle:
        case ScenarioName::FormationSquare:
        case ScenarioName::FormationRotation: return run_formation(cfg);
    }
    throw ConfigError("scenario", "unhandled scenario");
}

LandingOutcome landing_scenario(const ScenarioConfig& cfg, ScenarioResult* detail) {
    LandingOutcome outcome;
    ScenarioResult res = run_landing(cfg, &outcome);
    if (detail) {
        *detail = std::move(res);
    }
    return outcome;
}

json waypoints_to_json(const std::vector<Setpoint>& waypoints) {
    json arr = json::array();
    for (const auto& w : waypoints) {
        arr.push_back({w.x, w.y, w.z});
    }
    return arr;
}

std::vector<Setpoint> waypoints_from_json(const json& j) {
    std::vector<Setpoint> out;
    if (!j.is_array()) {
        throw ConfigError("waypoints", "expected an array of [x, y, z]");
    }
    for (const auto& w : j) {
        if (!w.is_array() || w.size() != 3) {
            throw ConfigError("waypoints", "expected [x, y, z] entries");
        }
        out.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
    }
    return out;
}

}  // namespace navsim
