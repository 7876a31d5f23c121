#include "navsim/config.hpp"

#include <fstream>

namespace navsim {

using nlohmann::json;

ScenarioName parse_scenario_name(const std::string& name) {
    if (name == "position_hold") return ScenarioName::PositionHold;
    if (name == "internal_only_drift") return ScenarioName::InternalOnlyDrift;
    if (name == "waypoint_nav") return ScenarioName::WaypointNav;
    if (name == "zn_autotune") return ScenarioName::ZnAutotune;
    if (name == "iterative_autotune") return ScenarioName::IterativeAutotune;
    if (name == "moving_platform_landing") return ScenarioName::MovingPlatformLanding;
    if (name == "hoop_traversal") return ScenarioName::HoopTraversal;
    if (name == "formation_circle") return ScenarioName::FormationCircle;
    if (name == "formation_square") return ScenarioName::FormationSquare;
    if (name == "formation_rotation") return ScenarioName::FormationRotation;
    throw ConfigError("scenario", "unknown scenario name: " + name);
}

std::string scenario_name_string(ScenarioName name) {
    switch (name) {
        case ScenarioName::PositionHold: return "position_hold";
        case ScenarioName::InternalOnlyDrift: return "internal_only_drift";
        case ScenarioName::WaypointNav: return "waypoint_nav";
        case ScenarioName::ZnAutotune: return "zn_autotune";
        case ScenarioName::IterativeAutotune: return "iterative_autotune";
        case ScenarioName::MovingPlatformLanding: return "moving_platform_landing";
        case ScenarioName::HoopTraversal: return "hoop_traversal";
        case ScenarioName::FormationCircle: return "formation_circle";
        case ScenarioName::FormationSquare: return "formation_square";
        case ScenarioName::FormationRotation: return "formation_rotation";
    }
    return "unknown";
}

std::vector<std::string> all_scenario_names() {
    return {"position_hold",   "internal_only_drift", "waypoint_nav",
            "zn_autotune",     "iterative_autotune",  "moving_platform_landing",
            "hoop_traversal",  "formation_circle",    "formation_square",
            "formation_rotation"};
}

CameraModel CameraConfig::model() const {
    CameraModel cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = cx;
    cam.cy = cy;
    cam.k1 = k1;
    cam.k2 = k2;
    cam.width = width;
    cam.height = height;
    cam.fps = fps;
    // 180-degree rotation about y, camera at (0, 0, mount_height) looking
    // down: p_cam = R * (p_world - mount).
    HomogeneousTransform r = HomogeneousTransform::rotation_y_180();
    r.translation = -(r.rotation * Vec3(0.0, 0.0, mount_height_m));
    cam.world_to_camera = r;
    return cam;
}

namespace {

double jget_num(const json& j, const std::string& path, const char* key, double def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number()) throw ConfigError(path + "." + key, "expected a number");
    return j[key].get<double>();
}

int jget_int(const json& j, const std::string& path, const char* key, int def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
    return j[key].get<int>();
}

uint64_t jget_u64(const json& j, const std::string& path, const char* key, uint64_t def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number_unsigned() && !j[key].is_number_integer())
        throw ConfigError(path + "." + key, "expected an integer");
    return j[key].get<uint64_t>();
}

bool jget_bool(const json& j, const std::string& path, const char* key, bool def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_boolean()) throw ConfigError(path + "." + key, "expected a boolean");
    return j[key].get<bool>();
}

std::string jget_str(const json& j, const std::string& path, const char* key,
                     const std::string& def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_string()) throw ConfigError(path + "." + key, "expected a string");
    return j[key].get<std::string>();
}

Vec3 jget_vec3(const json& j, const std::string& path, const char* key, const Vec3& def) {
    if (!j.contains(key)) return def;
    const auto& a = j[key];
    if (!a.is_array() || a.size() != 3 || !a[0].is_number())
        throw ConfigError(path + "." + key, "expected [x, y, z]");
    return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

PidGains parse_gains(const json& j, const std::string& path) {
    PidGains g;
    g.kp = jget_num(j, path, "kp", 0.0);
    g.ki = jget_num(j, path, "ki", 0.0);
    g.kd = jget_num(j, path, "kd", 0.0);
    return g;
}

json gains_json(const PidGains& g) {
    return json{{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}};
}

GainRange parse_range(const json& j, const std::string& path, const char* key) {
    GainRange r;
    if (!j.contains(key)) return r;
    const auto& a = j[key];
    if (!a.is_array() || a.size() != 2) throw ConfigError(path + "." + key, "expected [min, max]");
    r.min = a[0].get<double>();
    r.max = a[1].get<double>();
    return r;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (camera.fx <= 0.0 || camera.fy <= 0.0)
        throw ConfigError("camera.fx", "focal lengths must be positive");
    if (camera.fps <= 0.0) throw ConfigError("camera.fps", "fps must be positive");
    if (camera.width <= 0 || camera.height <= 0)
        throw ConfigError("camera.width", "resolution must be positive");
    if (drones.empty()) throw ConfigError("drones", "at least one drone required");
    if (duration_s < 0.0) throw ConfigError("duration_s", "duration must be >= 0");
    if (marker_spec.inner_diameter <= 0.0
        || marker_spec.inner_diameter >= marker_spec.outer_diameter)
        throw ConfigError("marker_spec", "0 < inner_diameter < outer_diameter required");
    if (unit_scale.meters_per_unit <= 0.0)
        throw ConfigError("unit_scale", "meters_per_unit must be positive");
    if (channel.drop_probability < 0.0 || channel.drop_probability >= 1.0)
        throw ConfigError("channel.drop_probability", "must be in [0, 1)");
    if (pid_time_s < 0.0 || buffer_s < 0.0)
        throw ConfigError("pid_time_s", "loop components must be >= 0");
    if (scenario == ScenarioName::WaypointNav && waypoint_nav.waypoints.empty())
        throw ConfigError("waypoint_nav.waypoints", "at least one waypoint required");
    if (scenario == ScenarioName::FormationSquare && drones.size() != 3)
        throw ConfigError("drones", "square formation needs exactly 3 drones");
    if (scenario == ScenarioName::FormationRotation && drones.size() != 3)
        throw ConfigError("drones", "rotation formation needs exactly 3 drones");
}

ScenarioConfig parse_config(const json& j) {
    ScenarioConfig cfg;
    if (!j.contains("scenario") || !j["scenario"].is_string())
        throw ConfigError("scenario", "missing scenario name");
    cfg.scenario = parse_scenario_name(j["scenario"].get<std::string>());

    const std::string mode = jget_str(j, "", "perception", "direct");
    if (mode == "rendered") {
        cfg.perception = PerceptionMode::Rendered;
    } else if (mode == "direct") {
        cfg.perception = PerceptionMode::Direct;
    } else {
        throw ConfigError("perception", "expected 'rendered' or 'direct'");
    }

    if (j.contains("camera")) {
        const auto& c = j["camera"];
        cfg.camera.fx = jget_num(c, "camera", "fx", cfg.camera.fx);
        cfg.camera.fy = jget_num(c, "camera", "fy", cfg.camera.fy);
        cfg.camera.cx = jget_num(c, "camera", "cx", cfg.camera.cx);
        cfg.camera.cy = jget_num(c, "camera", "cy", cfg.camera.cy);
        cfg.camera.k1 = jget_num(c, "camera", "k1", cfg.camera.k1);
        cfg.camera.k2 = jget_num(c, "camera", "k2", cfg.camera.k2);
        cfg.camera.width = jget_int(c, "camera", "width", cfg.camera.width);
        cfg.camera.height = jget_int(c, "camera", "height", cfg.camera.height);
        cfg.camera.fps = jget_num(c, "camera", "fps", cfg.camera.fps);
        cfg.camera.mount_height_m =
            jget_num(c, "camera", "mount_height_m", cfg.camera.mount_height_m);
    }

    if (j.contains("drones")) {
        if (!j["drones"].is_array()) throw ConfigError("drones", "expected an array");
        for (size_t i = 0; i < j["drones"].size(); ++i) {
            const auto& d = j["drones"][i];
            const std::string path = "drones[" + std::to_string(i) + "]";
            DroneConfig dc;
            dc.start_position = jget_vec3(d, path, "start_position", dc.start_position);
            dc.drift_enabled = jget_bool(d, path, "drift_enabled", false);
            dc.drift_walk_std = jget_num(d, path, "drift_walk_std", 0.0);
            dc.drift_alt_rate = jget_num(d, path, "drift_alt_rate", 0.0);
            dc.params.hover_pwm = jget_num(d, path, "hover_pwm", dc.params.hover_pwm);
            dc.params.k_throttle = jget_num(d, path, "k_throttle", dc.params.k_throttle);
            dc.params.drag_coeff = jget_num(d, path, "drag_coeff", dc.params.drag_coeff);
            dc.params.tau_attitude_s =
                jget_num(d, path, "tau_attitude_s", dc.params.tau_attitude_s);
            cfg.drones.push_back(dc);
        }
    } else {
        cfg.drones.push_back(DroneConfig{});
    }

    if (j.contains("gains")) {
        const auto& g = j["gains"];
        if (g.contains("x")) cfg.gains.x = parse_gains(g["x"], "gains.x");
        if (g.contains("y")) cfg.gains.y = parse_gains(g["y"], "gains.y");
        if (g.contains("z")) cfg.gains.z = parse_gains(g["z"], "gains.z");
    }

    if (j.contains("latency")) {
        const auto& l = j["latency"];
        cfg.latency.frame_capture_ms =
            jget_num(l, "latency", "frame_capture_ms", cfg.latency.frame_capture_ms);
        cfg.latency.marker_detection_ms =
            jget_num(l, "latency", "marker_detection_ms", cfg.latency.marker_detection_ms);
        cfg.latency.drone_identification_ms = jget_num(
            l, "latency", "drone_identification_ms", cfg.latency.drone_identification_ms);
        cfg.latency.pid_loop_ms = jget_num(l, "latency", "pid_loop_ms", cfg.latency.pid_loop_ms);
        cfg.latency.msp_packet_ms =
            jget_num(l, "latency", "msp_packet_ms", cfg.latency.msp_packet_ms);
        cfg.latency.communication_ms =
            jget_num(l, "latency", "communication_ms", cfg.latency.communication_ms);
    }

    if (j.contains("channel")) {
        const auto& c = j["channel"];
        cfg.channel.jitter_std_ms = jget_num(c, "channel", "jitter_std_ms", 0.0);
        cfg.channel.drop_probability = jget_num(c, "channel", "drop_probability", 0.0);
    }

    cfg.pid_time_s = jget_num(j, "", "pid_time_s", cfg.pid_time_s);
    cfg.buffer_s = jget_num(j, "", "buffer_s", cfg.buffer_s);

    if (j.contains("noise")) {
        const auto& n = j["noise"];
        cfg.noise.measurement_std = jget_num(n, "noise", "measurement_std", 0.0);
        cfg.noise.measurement_bias = jget_vec3(n, "noise", "measurement_bias", Vec3::Zero());
        cfg.noise.disturbance_accel = jget_vec3(n, "noise", "disturbance_accel", Vec3::Zero());
        cfg.noise.disturbance_sin_amp = jget_num(n, "noise", "disturbance_sin_amp", 0.0);
        cfg.noise.disturbance_sin_period_s =
            jget_num(n, "noise", "disturbance_sin_period_s", 30.0);
    }

    if (j.contains("marker_spec")) {
        const auto& m = j["marker_spec"];
        cfg.marker_spec.outer_diameter =
            jget_num(m, "marker_spec", "outer_diameter", cfg.marker_spec.outer_diameter);
        cfg.marker_spec.inner_diameter =
            jget_num(m, "marker_spec", "inner_diameter", cfg.marker_spec.inner_diameter);
    }

    cfg.unit_scale.meters_per_unit =
        jget_num(j, "", "meters_per_unit", cfg.unit_scale.meters_per_unit);
    cfg.seed = jget_u64(j, "", "seed", cfg.seed);
    cfg.duration_s = jget_num(j, "", "duration_s", cfg.duration_s);
    cfg.tracker_miss_window = jget_int(j, "", "tracker_miss_window", 5);
    cfg.out_dir = jget_str(j, "", "out_dir", "");

    if (j.contains("hold_setpoint")) {
        const Vec3 sp = jget_vec3(j, "", "hold_setpoint", Vec3::Zero());
        cfg.hold_setpoint = {sp.x(), sp.y(), sp.z()};
    }

    if (j.contains("z_correction")) {
        const auto& z = j["z_correction"];
        EllipsoidZCorrection c;
        c.semi_axis_a = jget_num(z, "z_correction", "semi_axis_a", 20.0);
        c.semi_axis_b = jget_num(z, "z_correction", "semi_axis_b", 15.0);
        c.apex_z = jget_num(z, "z_correction", "apex_z", 30.0);
        cfg.z_correction = c;
    }

    if (j.contains("waypoint_nav")) {
        const auto& wn = j["waypoint_nav"];
        cfg.waypoint_nav.arrival_tolerance =
            jget_num(wn, "waypoint_nav", "arrival_tolerance", 0.8);
        cfg.waypoint_nav.dwell_s = jget_num(wn, "waypoint_nav", "dwell_s", 2.0);
        if (wn.contains("waypoints")) {
            if (!wn["waypoints"].is_array())
                throw ConfigError("waypoint_nav.waypoints", "expected an array");
            cfg.waypoint_nav.waypoints.clear();
            for (const auto& w : wn["waypoints"]) {
                if (!w.is_array() || w.size() != 3)
                    throw ConfigError("waypoint_nav.waypoints", "expected [x, y, z] entries");
                cfg.waypoint_nav.waypoints.push_back(
                    {w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
            }
        }
    }

    if (j.contains("landing")) {
        const auto& l = j["landing"];
        auto& lc = cfg.landing;
        if (l.contains("platform")) {
            const auto& p = l["platform"];
            lc.platform.path_center.x() = jget_num(p, "landing.platform", "center_x", 0.4);
            lc.platform.path_center.y() = jget_num(p, "landing.platform", "center_y", 0.0);
            lc.platform.path_radius_m =
                jget_num(p, "landing.platform", "path_radius_m", lc.platform.path_radius_m);
            lc.platform.speed_mps =
                jget_num(p, "landing.platform", "speed_mps", lc.platform.speed_mps);
            lc.platform.deck_height_m =
                jget_num(p, "landing.platform", "deck_height_m", lc.platform.deck_height_m);
            lc.platform.path_segments =
                jget_int(p, "landing.platform", "path_segments", lc.platform.path_segments);
        }
        lc.approach_clearance_m =
            jget_num(l, "landing", "approach_clearance_m", lc.approach_clearance_m);
        lc.descend_threshold_units =
            jget_num(l, "landing", "descend_threshold_units", lc.descend_threshold_units);
        lc.descent_rate_units = jget_num(l, "landing", "descent_rate_units", lc.descent_rate_units);
        lc.contact_eps_m = jget_num(l, "landing", "contact_eps_m", lc.contact_eps_m);
        lc.lead_time_s = jget_num(l, "landing", "lead_time_s", lc.lead_time_s);
        lc.min_hover_s = jget_num(l, "landing", "min_hover_s", lc.min_hover_s);
    }

    if (j.contains("hoop")) {
        const auto& hp = j["hoop"];
        auto& hc = cfg.hoop;
        if (hp.contains("bounds_min"))
            hc.scene.bounds.min = jget_vec3(hp, "hoop", "bounds_min", hc.scene.bounds.min);
        if (hp.contains("bounds_max"))
            hc.scene.bounds.max = jget_vec3(hp, "hoop", "bounds_max", hc.scene.bounds.max);
        if (hp.contains("hoops")) {
            if (!hp["hoops"].is_array()) throw ConfigError("hoop.hoops", "expected an array");
            hc.scene.hoops.clear();
            for (size_t i = 0; i < hp["hoops"].size(); ++i) {
                const auto& h = hp["hoops"][i];
                const std::string path = "hoop.hoops[" + std::to_string(i) + "]";
                Hoop hoop;
                hoop.center = jget_vec3(h, path, "center", hoop.center);
                hoop.axis = jget_vec3(h, path, "axis", hoop.axis).normalized();
                hoop.inner_radius = jget_num(h, path, "inner_radius", hoop.inner_radius);
                hoop.tube_radius = jget_num(h, path, "tube_radius", hoop.tube_radius);
                hoop.wall_extent = jget_num(h, path, "wall_extent", hoop.wall_extent);
                hc.scene.hoops.push_back(hoop);
            }
        }
        if (hp.contains("sequence")) {
            hc.sequence.clear();
            for (const auto& s : hp["sequence"]) hc.sequence.push_back(s.get<int>());
        }
        hc.traversal.standoff = jget_num(hp, "hoop", "standoff", hc.traversal.standoff);
        hc.traversal.rrt.max_iterations =
            jget_int(hp, "hoop", "max_iterations", hc.traversal.rrt.max_iterations);
        hc.traversal.rrt.max_seconds =
            jget_num(hp, "hoop", "max_seconds", hc.traversal.rrt.max_seconds);
        hc.traversal.rrt.drone_radius =
            jget_num(hp, "hoop", "drone_radius", hc.traversal.rrt.drone_radius);
        hc.traversal.rrt.seed = jget_u64(hp, "hoop", "rrt_seed", hc.traversal.rrt.seed);
        hc.arrival_tolerance = jget_num(hp, "hoop", "arrival_tolerance", hc.arrival_tolerance);
        hc.dwell_s = jget_num(hp, "hoop", "dwell_s", hc.dwell_s);
    }

    if (j.contains("formation")) {
        const auto& f = j["formation"];
        cfg.formation.radius = jget_num(f, "formation", "radius", cfg.formation.radius);
        cfg.formation.z = jget_num(f, "formation", "z", cfg.formation.z);
        cfg.formation.dist_apart = jget_num(f, "formation", "dist_apart", cfg.formation.dist_apart);
        cfg.formation.step_period_s =
            jget_num(f, "formation", "step_period_s", cfg.formation.step_period_s);
        cfg.formation.square_side =
            jget_num(f, "formation", "square_side", cfg.formation.square_side);
        cfg.formation.square_period_s =
            jget_num(f, "formation", "square_period_s", cfg.formation.square_period_s);
    }

    if (j.contains("relay")) {
        const auto& r = j["relay"];
        cfg.relay.amplitude = jget_num(r, "relay", "amplitude", cfg.relay.amplitude);
        cfg.relay.cycles = jget_int(r, "relay", "cycles", cfg.relay.cycles);
        cfg.relay.hysteresis = jget_num(r, "relay", "hysteresis", cfg.relay.hysteresis);
        cfg.relay.controller_type = jget_str(r, "relay", "controller_type", cfg.relay.controller_type);
        cfg.relay.setpoint_z = jget_num(r, "relay", "setpoint_z", cfg.relay.setpoint_z);
    }

    if (j.contains("autotune")) {
        const auto& a = j["autotune"];
        const char* axis_keys[3] = {"phi", "theta", "throttle"};
        for (int i = 0; i < 3; ++i) {
            if (a.contains(axis_keys[i])) {
                const auto& ax = a[axis_keys[i]];
                const std::string path = std::string("autotune.") + axis_keys[i];
                cfg.autotune.ranges[i].kp = parse_range(ax, path, "kp");
                cfg.autotune.ranges[i].ki = parse_range(ax, path, "ki");
                cfg.autotune.ranges[i].kd = parse_range(ax, path, "kd");
            }
        }
        cfg.autotune.threshold = jget_num(a, "autotune", "threshold", cfg.autotune.threshold);
        cfg.autotune.threshold_prime =
            jget_num(a, "autotune", "threshold_prime", cfg.autotune.threshold_prime);
        cfg.autotune.trial_duration_s =
            jget_num(a, "autotune", "trial_duration_s", cfg.autotune.trial_duration_s);
        cfg.autotune.trial_step_units =
            jget_num(a, "autotune", "trial_step_units", cfg.autotune.trial_step_units);
    }

    cfg.validate();
    return cfg;
}

namespace {

json base_defaults() {
    json j;
    j["scenario"] = "position_hold";
    j["perception"] = "direct";
    j["camera"] = {{"fx", 600.0}, {"fy", 600.0}, {"cx", 320.0}, {"cy", 240.0},
                   {"k1", 0.0},   {"k2", 0.0},   {"width", 640}, {"height", 480},
                   {"fps", 120.0}, {"mount_height_m", 3.5}};
    j["drones"] = json::array({json{{"start_position", {0.0, 0.0, 1.0}}}});
    // Gains tuned against the default vehicle and the full latency budget.
    j["gains"] = {{"x", {{"kp", 6.0}, {"ki", 0.15}, {"kd", 18.0}}},
                  {"y", {{"kp", 6.0}, {"ki", 0.15}, {"kd", 18.0}}},
                  {"z", {{"kp", 20.0}, {"ki", 0.8}, {"kd", 6.0}}}};
    j["latency"] = {{"frame_capture_ms", 8.33}, {"marker_detection_ms", 12.0},
                    {"drone_identification_ms", 27.0}, {"pid_loop_ms", 100.0},
                    {"msp_packet_ms", 190.0}, {"communication_ms", 4.0}};
    j["channel"] = {{"jitter_std_ms", 0.0}, {"drop_probability", 0.0}};
    j["pid_time_s"] = 0.1;
    j["buffer_s"] = 0.01;
    j["noise"] = {{"measurement_std", 0.0},
                  {"measurement_bias", {0.0, 0.0, 0.0}},
                  {"disturbance_accel", {0.0, 0.0, 0.0}},
                  {"disturbance_sin_amp", 0.0},
                  {"disturbance_sin_period_s", 30.0}};
    j["marker_spec"] = {{"outer_diameter", 0.055}, {"inner_diameter", 0.02}};
    j["meters_per_unit"] = 0.10;
    j["seed"] = 1;
    j["duration_s"] = 60.0;
    // Hold at the start position: world (0,0,1) maps to WhyCon (0,0,25).
    j["hold_setpoint"] = {0.0, 0.0, 25.0};
    j["tracker_miss_window"] = 5;
    return j;
}

}  // namespace

json default_config_json(ScenarioName name) {
    json j = base_defaults();
    j["scenario"] = scenario_name_string(name);
    switch (name) {
        case ScenarioName::PositionHold:
            j["noise"]["measurement_std"] = 0.06;
            j["noise"]["disturbance_accel"] = {0.045, -0.006, 0.0};
            j["gains"]["x"]["ki"] = 0.0;  // bias survives: the Fig-6 envelope is offset
            j["gains"]["y"]["ki"] = 0.02;
            break;
        case ScenarioName::InternalOnlyDrift: {
            j["duration_s"] = 90.0;
            auto& d = j["drones"][0];
            d["drift_enabled"] = true;
            d["drift_walk_std"] = 0.025;
            d["drift_alt_rate"] = 0.008;
            break;
        }
        case ScenarioName::WaypointNav:
            j["duration_s"] = 60.0;
            j["waypoint_nav"] = {
                {"waypoints", {{0.0, 0.0, 25.0}, {0.0, 6.0, 25.0}, {6.0, 6.0, 25.0},
                               {0.0, 0.0, 25.0}}},
                {"arrival_tolerance", 0.8},
                {"dwell_s", 2.0}};
            j["noise"]["measurement_std"] = 0.05;
            break;
        case ScenarioName::ZnAutotune:
            j["duration_s"] = 240.0;
            j["noise"]["measurement_std"] = 0.02;
            j["relay"] = {{"amplitude", 100.0}, {"cycles", 5}, {"hysteresis", 0.05},
                          {"controller_type", "No overshoot"}, {"setpoint_z", 25.0}};
            break;
        case ScenarioName::IterativeAutotune:
            j["duration_s"] = 600.0;
            // Steady disturbances leave a proportional-only bias for the
            // integral sweep to work against.
            j["noise"]["measurement_std"] = 0.03;
            j["noise"]["disturbance_accel"] = {0.08, 0.08, -0.01};
            j["autotune"] = {{"phi", {{"kp", {2.0, 14.0}}, {"ki", {0.0, 6.0}}, {"kd", {10.0, 40.0}}}},
                             {"theta", {{"kp", {2.0, 14.0}}, {"ki", {0.0, 6.0}}, {"kd", {10.0, 40.0}}}},
                             {"throttle", {{"kp", {6.0, 30.0}}, {"ki", {0.0, 6.0}}, {"kd", {2.0, 20.0}}}},
                             {"threshold", 1.0},
                             {"threshold_prime", 0.5},
                             {"trial_duration_s", 8.0},
                             {"trial_step_units", 2.0}};
            break;
        case ScenarioName::MovingPlatformLanding:
            j["perception"] = "rendered";
            j["duration_s"] = 90.0;
            j["drones"][0]["start_position"] = {0.0, 0.0, 0.85};
            j["landing"] = {{"platform",
                             {{"center_x", 0.4}, {"center_y", 0.0}, {"path_radius_m", 0.4},
                              {"speed_mps", 0.12}, {"deck_height_m", 0.15},
                              {"path_segments", 64}}},
                            {"approach_clearance_m", 0.7},
                            {"descend_threshold_units", 0.8},
                            {"descent_rate_units", 1.2},
                            {"contact_eps_m", 0.03},
                            {"lead_time_s", 1.2}};
            break;
        case ScenarioName::HoopTraversal: {
            j["camera"]["fx"] = 380.0;
            j["camera"]["fy"] = 380.0;
            j["camera"]["mount_height_m"] = 4.0;
            j["duration_s"] = 400.0;
            j["drones"][0]["start_position"] = {1.4, 0.0, 1.3};
            j["hold_setpoint"] = {-14.0, 0.0, 27.0};
            j["noise"]["measurement_std"] = 0.04;
            json hoops = json::array();
            for (double x : {-10.0, 0.0, 10.0}) {
                hoops.push_back({{"center", {x, 0.0, 27.0}}, {"axis", {1.0, 0.0, 0.0}},
                                 {"inner_radius", 2.5}, {"tube_radius", 0.3},
                                 {"wall_extent", 2.0}});
            }
            j["hoop"] = {{"bounds_min", {-16.0, -9.0, 16.0}},
                         {"bounds_max", {16.0, 9.0, 34.0}},
                         {"hoops", hoops},
                         {"sequence", {0, 1, 2}},
                         {"standoff", 3.0},
                         {"max_iterations", 4000},
                         {"max_seconds", 20.0},
                         {"drone_radius", 0.6},
                         {"rrt_seed", 7},
                         {"arrival_tolerance", 0.9},
                         {"dwell_s", 0.0}};
            break;
        }
        case ScenarioName::FormationCircle:
            j["perception"] = "rendered";
            j["duration_s"] = 55.0;
            j["drones"][0]["start_position"] = {0.0, 0.6, 1.0};
            j["formation"] = {{"radius", 6.0}, {"z", 25.0}, {"dist_apart", 0.0},
                              {"step_period_s", 1.2}};
            j["channel"]["jitter_std_ms"] = 10.0;
            break;
        case ScenarioName::FormationSquare: {
            j["perception"] = "rendered";
            j["duration_s"] = 40.0;
            j["formation"] = {{"square_side", 8.0}, {"z", 25.0}, {"square_period_s", 5.0}};
            j["channel"]["jitter_std_ms"] = 10.0;
            json drones = json::array();
            // Start at the first scheduled vertices (WhyCon (4,4) and (-4,-4)).
            drones.push_back({{"start_position", {-0.4, 0.4, 1.0}}});
            drones.push_back({{"start_position", {0.4, -0.4, 1.0}}});
            drones.push_back({{"start_position", {0.0, 0.0, 1.0}}});
            j["drones"] = drones;
            break;
        }
        case ScenarioName::FormationRotation: {
            j["perception"] = "rendered";
            j["duration_s"] = 55.0;
            j["formation"] = {{"radius", 6.0}, {"z", 25.0}, {"dist_apart", 120.0},
                              {"step_period_s", 1.2}};
            j["channel"]["jitter_std_ms"] = 10.0;
            json drones = json::array();
            // Start near the a=0 arc position of each 120-degree phase.
            drones.push_back({{"start_position", {0.0, 0.6, 1.0}}});
            drones.push_back({{"start_position", {-0.52, -0.3, 1.0}}});
            drones.push_back({{"start_position", {0.52, -0.3, 1.0}}});
            j["drones"] = drones;
            break;
        }
    }
    return j;
}

ScenarioConfig make_config(ScenarioName name, const std::optional<std::string>& config_path) {
    json j = default_config_json(name);
    if (config_path) {
        std::ifstream in(*config_path);
        if (!in) {
            throw ConfigError("config", "cannot open file: " + *config_path);
        }
        json overlay;
        try {
            in >> overlay;
        } catch (const json::exception& e) {
            throw ConfigError("config", std::string("JSON parse failure: ") + e.what());
        }
        j.merge_patch(overlay);
    }
    return parse_config(j);
}

json config_to_json(const ScenarioConfig& cfg) {
    json j;
    j["scenario"] = scenario_name_string(cfg.scenario);
    j["perception"] = cfg.perception == PerceptionMode::Rendered ? "rendered" : "direct";
    j["camera"] = {{"fx", cfg.camera.fx}, {"fy", cfg.camera.fy}, {"cx", cfg.camera.cx},
                   {"cy", cfg.camera.cy}, {"k1", cfg.camera.k1}, {"k2", cfg.camera.k2},
                   {"width", cfg.camera.width}, {"height", cfg.camera.height},
                   {"fps", cfg.camera.fps}, {"mount_height_m", cfg.camera.mount_height_m}};
    json drones = json::array();
    for (const auto& d : cfg.drones) {
        drones.push_back({{"start_position", vec3_json(d.start_position)},
                          {"drift_enabled", d.drift_enabled},
                          {"drift_walk_std", d.drift_walk_std},
                          {"drift_alt_rate", d.drift_alt_rate}});
    }
    j["drones"] = drones;
    j["gains"] = {{"x", gains_json(cfg.gains.x)}, {"y", gains_json(cfg.gains.y)},
                  {"z", gains_json(cfg.gains.z)}};
    j["latency"] = {{"frame_capture_ms", cfg.latency.frame_capture_ms},
                    {"marker_detection_ms", cfg.latency.marker_detection_ms},
                    {"drone_identification_ms", cfg.latency.drone_identification_ms},
                    {"pid_loop_ms", cfg.latency.pid_loop_ms},
                    {"msp_packet_ms", cfg.latency.msp_packet_ms},
                    {"communication_ms", cfg.latency.communication_ms}};
    j["seed"] = cfg.seed;
    j["duration_s"] = cfg.duration_s;
    j["hold_setpoint"] = {cfg.hold_setpoint.x, cfg.hold_setpoint.y, cfg.hold_setpoint.z};
    return j;
}

}  // namespace navsim
