#include "navsim/sim.hpp"

#include <algorithm>
#include <cmath>

namespace navsim {

namespace {

constexpr double kMaxSubstep = 0.01;

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    // splitmix64 step keeps per-subsystem streams decorrelated.
    uint64_t z = seed + stream * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

SimWorld::SimWorld(const ScenarioConfig& cfg)
    : cfg_(cfg),
      camera_(cfg.camera.model()),
      timing_(cfg.timing()),
      channel_(ChannelModel::Params{cfg.channel.jitter_std_ms, cfg.channel.drop_probability,
                                    mix_seed(cfg.seed, 1)}),
      detector_(DetectorParams{cfg.marker_spec}) {
    std::vector<WhyConPose> start_poses;
    for (size_t i = 0; i < cfg.drones.size(); ++i) {
        const auto& dc = cfg.drones[i];
        DroneAgent agent;
        agent.state.position = dc.start_position;
        agent.state.estimate = dc.start_position;
        agent.state.index = static_cast<int>(i);
        agent.drift.velocity_walk_std = dc.drift_walk_std;
        agent.drift.altitude_rate = dc.drift_alt_rate;
        agent.drift.enabled = dc.drift_enabled;
        agent.drift.seed = mix_seed(cfg.seed, 100 + i);
        agent.drift.reset();
        agent.controller.gains_x = cfg.gains.x;
        agent.controller.gains_y = cfg.gains.y;
        agent.controller.gains_z = cfg.gains.z;
        agent.controller.timing = timing_;
        agent.setpoint = cfg.hold_setpoint;
        agent.tracker_id = static_cast<int>(i);
        agent.noise_rng.seed(mix_seed(cfg.seed, 200 + i));
        drones_.push_back(std::move(agent));

        const Vec3 units = world_to_whycon(dc.start_position);
        WhyConPose p;
        p.x = units.x();
        p.y = units.y();
        p.z = units.z();
        p.id = static_cast<int>(i);
        start_poses.push_back(p);
    }

    if (cfg.scenario == ScenarioName::MovingPlatformLanding) {
        const auto& pc = cfg.landing.platform;
        std::vector<Vec2> path;
        for (int k = 0; k < pc.path_segments; ++k) {
            const double a = 2.0 * M_PI * k / pc.path_segments;
            path.emplace_back(pc.path_center.x() + pc.path_radius_m * std::cos(a),
                              pc.path_center.y() + pc.path_radius_m * std::sin(a));
        }
        platform_ = init_platform(path, pc.speed_mps, pc.deck_height_m);
        const Vec3 units = world_to_whycon(platform_->position);
        WhyConPose p;
        p.x = units.x();
        p.y = units.y();
        p.z = units.z();
        p.id = static_cast<int>(start_poses.size());
        start_poses.push_back(p);
    }

    const int max_targets = static_cast<int>(start_poses.size());
    tracker_ = init_tracker(start_poses, max_targets, cfg.tracker_miss_window);
}

Vec3 SimWorld::world_to_whycon(const Vec3& p) const {
    return meters_to_units(camera_.to_camera_frame(p), cfg_.unit_scale);
}

bool SimWorld::truth_in_fov(const Vec3& p) const {
    try {
        const Vec2 uv = project(camera_, p);
        return uv.x() >= 0.0 && uv.x() < camera_.width && uv.y() >= 0.0
            && uv.y() < camera_.height;
    } catch (const PointBehindCamera&) {
        return false;
    }
}

std::optional<WhyConPose> SimWorld::tracked_pose(int id) const {
    if (!have_snapshot_) {
        return std::nullopt;
    }
    for (const auto& t : visible_tracks_) {
        if (t.id == id) {
            return t.pose;
        }
    }
    return std::nullopt;
}

void SimWorld::integrate_vehicles(double t_to) {
    double t = t_;
    while (t < t_to - 1e-12) {
        const double dt = std::min(kMaxSubstep, t_to - t);
        const double tmid = t + dt;
        for (auto& agent : drones_) {
            CommandMessage cmd = agent.has_cmd ? agent.active_cmd : CommandMessage{};
            if (!agent.has_cmd) {
                cmd.rc_aux4 = 1000;  // no command received yet: stay disarmed
            }
            agent.state = apply_aux(agent.state, cmd);
            agent.state = step_drone(agent.state, cmd, dt, agent.drift);

            if (agent.state.armed) {
                // External disturbances: constant + slow sine acceleration on
                // x/y, a direct velocity offset on z.
                const auto& nz = cfg_.noise;
                Vec3 a_dist(nz.disturbance_accel.x(), nz.disturbance_accel.y(), 0.0);
                if (nz.disturbance_sin_amp != 0.0) {
                    const double w = 2.0 * M_PI / nz.disturbance_sin_period_s;
                    a_dist.x() += nz.disturbance_sin_amp * std::sin(w * tmid);
                    a_dist.y() += nz.disturbance_sin_amp * std::cos(w * tmid);
                }
                agent.state.velocity.x() += a_dist.x() * dt;
                agent.state.velocity.y() += a_dist.y() * dt;
                agent.state.position.x() += a_dist.x() * dt * dt;
                agent.state.position.y() += a_dist.y() * dt * dt;
                agent.state.position.z() += nz.disturbance_accel.z() * dt;
            }
        }
        if (platform_) {
            platform_ = step_platform(*platform_, dt);
        }
        t = tmid;
    }
    t_ = t_to;
}

void SimWorld::perception_tick(double t) {
    std::vector<WhyConPose> observations;

    if (cfg_.perception == PerceptionMode::Rendered) {
        std::vector<MarkerPlacement> placements;
        for (const auto& agent : drones_) {
            MarkerPlacement mp;
            mp.spec = cfg_.marker_spec;
            mp.center = agent.state.position;
            // The marker tilts with the airframe.
            const double cr = std::cos(agent.state.roll);
            const double sr = std::sin(agent.state.roll);
            const double cp = std::cos(agent.state.pitch);
            const double sp = std::sin(agent.state.pitch);
            mp.normal = Vec3(sp * cr, -sr, cp * cr).normalized();
            placements.push_back(mp);
        }
        if (platform_) {
            MarkerPlacement mp;
            mp.spec = cfg_.marker_spec;
            mp.center = platform_->position;
            mp.normal = Vec3::UnitZ();
            placements.push_back(mp);
        }
        const Frame frame = render(placements, camera_, t);
        // One extra slot beyond the locked target count lets the tracking
        // service spot a reappearing marker and raise n again.
        const int slots = std::min(tracker_.max_count, tracker_.expected_count + 1);
        const auto detections = detector_.detect(frame, slots);
        for (const auto& d : detections) {
            WhyConPose pose = localize(d, camera_, cfg_.marker_spec, cfg_.unit_scale, t);
            if (cfg_.z_correction) {
                try {
                    pose = correct_z(*cfg_.z_correction, pose);
                } catch (const FitOutOfDomain&) {
                    // outside the calibrated footprint: keep the raw reading
                }
            }
            observations.push_back(pose);
        }
    } else {
        // Direct mode: exact transform plus calibrated noise, visibility by
        // field of view only.
        auto observe = [&](const Vec3& world, std::mt19937_64& rng) {
            if (!truth_in_fov(world)) {
                return;
            }
            const Vec3 units = world_to_whycon(world);
            WhyConPose pose;
            std::normal_distribution<double> noise(0.0, cfg_.noise.measurement_std);
            pose.x = units.x() + cfg_.noise.measurement_bias.x()
                   + (cfg_.noise.measurement_std > 0.0 ? noise(rng) : 0.0);
            pose.y = units.y() + cfg_.noise.measurement_bias.y()
                   + (cfg_.noise.measurement_std > 0.0 ? noise(rng) : 0.0);
            pose.z = units.z() + cfg_.noise.measurement_bias.z()
                   + (cfg_.noise.measurement_std > 0.0 ? noise(rng) : 0.0);
            pose.timestamp = t;
            observations.push_back(pose);
        };
        for (auto& agent : drones_) {
            observe(agent.state.position, agent.noise_rng);
        }
        if (platform_) {
            observe(platform_->position, drones_.front().noise_rng);
        }
    }

    track(tracker_, observations);
    if (auto ev = adapt_count(tracker_)) {
        adapt_events_.push_back(*ev);
        adapt_event_times_.push_back(t);
        std::string s = "adapt:n=" + std::to_string(ev->new_count);
        if (ev->removed_id) s += ",-" + std::to_string(*ev->removed_id);
        if (ev->added_id) s += ",+" + std::to_string(*ev->added_id);
        queue_event(s);
    }

    Snapshot snap;
    snap.avail_time = t + cfg_.latency.perception_ms() * 1e-3;
    snap.tracks = tracker_.tracks;
    pending_snapshots_.push_back(std::move(snap));
}

void SimWorld::deliver_due(double t) {
    for (auto& ev : channel_.poll(t)) {
        if (ev.drone_index < 0 || ev.drone_index >= static_cast<int>(drones_.size())) {
            continue;
        }
        DroneAgent& agent = drones_[ev.drone_index];
        const auto frames = agent.decoder.feed(ev.bytes);
        for (const auto& frame : frames) {
            agent.active_cmd = decode_command(frame, ev.drone_index);
            agent.has_cmd = true;
        }
        auto& fifo = inflight_capture_times_[ev.drone_index];
        if (!fifo.empty()) {
            const double capture = fifo.front();
            fifo.pop_front();
            if (capture >= 0.0) {
                const double latency = ev.deliver_time - capture;
                latency_sum_ += latency;
                ++latency_.count;
                latency_.mean_s = latency_sum_ / static_cast<double>(latency_.count);
                latency_.max_s = std::max(latency_.max_s, latency);
                latency_.min_s = latency_.count == 1 ? latency : std::min(latency_.min_s, latency);
            }
        }
    }
}

void SimWorld::control_tick(double t, const Hooks& hooks) {
    // Publish the freshest fully-processed perception snapshot.
    while (!pending_snapshots_.empty() && pending_snapshots_.front().avail_time <= t) {
        visible_tracks_ = std::move(pending_snapshots_.front().tracks);
        pending_snapshots_.pop_front();
        have_snapshot_ = true;
    }

    if (hooks.pre_control) {
        hooks.pre_control(*this, t);
    }

    for (auto& agent : drones_) {
        std::optional<WhyConPose> pose;
        if (agent.use_self_estimate) {
            const Vec3 units = world_to_whycon(agent.state.estimate);
            WhyConPose p;
            p.x = units.x();
            p.y = units.y();
            p.z = units.z();
            p.id = agent.tracker_id;
            p.timestamp = t;
            pose = p;
        } else {
            pose = tracked_pose(agent.tracker_id);
        }

        CommandMessage cmd;
        bool stale = false;
        Vec3 error = Vec3::Zero();
        bool estimate_valid = pose.has_value();
        std::optional<CommandMessage> overridden;
        if (hooks.command_override) {
            overridden = hooks.command_override(*this, agent.state.index, t);
        }
        if (overridden) {
            cmd = *overridden;
            if (pose) {
                error = pose->vec() - agent.setpoint.vec();
            }
        } else if (pose) {
            auto out = agent.controller.update(*pose, agent.setpoint, t, timing_.sample_time());
            cmd = out.command;
            stale = out.stale;
            error = out.error;
            if (stale) {
                estimate_valid = false;
                queue_event("stale:" + std::to_string(agent.state.index));
            }
        } else {
            cmd = CommandMessage{};  // neutral until the first pose arrives
            stale = true;
        }
        cmd.rc_aux4 = 1600;  // keep armed
        cmd.drone_index = agent.state.index;

        const double pid_delay = cfg_.latency.pid_loop_ms * 1e-3;
        const auto bytes = encode(cmd);
        const auto ev = channel_.send(cfg_.latency, bytes, agent.state.index, t + pid_delay);
        if (!ev.dropped) {
            inflight_capture_times_[agent.state.index].push_back(
                !stale && pose ? pose->timestamp : -1.0);
        } else {
            queue_event("drop:" + std::to_string(agent.state.index));
        }

        LogRow row;
        row.t = t;
        row.drone_id = agent.state.index;
        row.truth = world_to_whycon(agent.state.position);
        row.estimate_valid = estimate_valid;
        if (pose) {
            row.estimate = pose->vec();
        }
        row.setpoint = agent.setpoint.vec();
        row.error = estimate_valid ? error : Vec3::Zero();
        row.pwm = {cmd.rc_roll, cmd.rc_pitch, cmd.rc_yaw, cmd.rc_throttle};
        row.truth_in_fov = truth_in_fov(agent.state.position);
        row.event = pending_event_;
        pending_event_.clear();
        log_.rows.push_back(std::move(row));
    }
}

void SimWorld::run(double duration_s, const Hooks& hooks) {
    const double t_end = t_ + duration_s;
    const double frame_period = 1.0 / camera_.fps;
    const double control_period = timing_.sample_time();

    while (t_ < t_end - 1e-12) {
        double t_next = std::min(next_perception_, next_control_);
        if (auto d = channel_.next_delivery_time()) {
            t_next = std::min(t_next, *d);
        }
        t_next = std::min(t_next, t_end);

        integrate_vehicles(t_next);
        deliver_due(t_);

        if (t_ >= next_perception_ - 1e-12) {
            perception_tick(t_);
            next_perception_ += frame_period;
            if (hooks.post_perception) {
                hooks.post_perception(*this, t_);
            }
        }
        if (t_ >= next_control_ - 1e-12) {
            control_tick(t_, hooks);
            next_control_ += control_period;
        }
        if (hooks.stop && hooks.stop(*this, t_)) {
            break;
        }
    }
}

}  // namespace navsim
