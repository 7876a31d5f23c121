#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <random>

#include "navsim/config.hpp"
#include "navsim/control.hpp"
#include "navsim/marker.hpp"
#include "navsim/msp.hpp"
#include "navsim/runlog.hpp"
#include "navsim/vehicle.hpp"

namespace navsim {

/// One simulated drone with its controller and command-channel endpoint.
struct DroneAgent {
    DroneState state;
    DriftModel drift;
    PositionController controller;
    Setpoint setpoint;
    FrameDecoder decoder;
    CommandMessage active_cmd;       // zero-order hold between deliveries
    bool has_cmd = false;
    int tracker_id = 0;
    std::mt19937_64 noise_rng;
    bool use_self_estimate = false;  // internal-only control mode
};

/// Deterministic software-in-the-loop world: virtual clock, perception at
/// camera fps, control every sample time, commands through the MSP channel
/// under the latency budget.
class SimWorld {
public:
    struct Hooks {
        // Called at each control tick before commands are computed.
        std::function<void(SimWorld&, double)> pre_control;
        // Replaces the PID command for one drone when set (relay tuning).
        std::function<std::optional<CommandMessage>(SimWorld&, int, double)> command_override;
        // Simulation ends early when this returns true.
        std::function<bool(SimWorld&, double)> stop;
        // Called after each perception update.
        std::function<void(SimWorld&, double)> post_perception;
    };

    explicit SimWorld(const ScenarioConfig& cfg);

    void run(double duration_s, const Hooks& hooks = {});

    // WhyCon units of a world point under the exact camera transform.
    Vec3 world_to_whycon(const Vec3& p) const;
    bool truth_in_fov(const Vec3& p) const;

    const ScenarioConfig& config() const { return cfg_; }
    double time() const { return t_; }
    RunLog& log() { return log_; }
    const RunLog& log() const { return log_; }
    std::vector<DroneAgent>& drones() { return drones_; }
    const TrackerState& tracker() const { return tracker_; }
    TrackerState& tracker() { return tracker_; }
    std::optional<PlatformState>& platform() { return platform_; }
    const CameraModel& camera() const { return camera_; }

    /// Latest tracked pose for an id, if fresh enough to have been published.
    std::optional<WhyConPose> tracked_pose(int id) const;

    /// The perception snapshot currently visible to controllers (delayed by
    /// the perception latency budget).
    const std::vector<Track>& published_tracks() const { return visible_tracks_; }

    /// Mean and max command-to-actuation latency measured from frame capture
    /// to command delivery (seconds). Empty before the first delivery.
    struct LatencyStats {
        double mean_s = 0.0;
        double max_s = 0.0;
        double min_s = 0.0;
        size_t count = 0;
    };
    LatencyStats latency_stats() const { return latency_; }

    const std::vector<AdaptEvent>& adapt_events() const { return adapt_events_; }
    const std::vector<double>& adapt_event_times() const { return adapt_event_times_; }

    void queue_event(const std::string& s) { pending_event_ += pending_event_.empty() ? s : ";" + s; }

private:
    void integrate_vehicles(double t_to);
    void perception_tick(double t);
    void control_tick(double t, const Hooks& hooks);
    void deliver_due(double t);

    ScenarioConfig cfg_;
    CameraModel camera_;
    LoopTiming timing_;
    std::vector<DroneAgent> drones_;
    std::optional<PlatformState> platform_;
    ChannelModel channel_;
    TrackerState tracker_;
    MarkerDetector detector_;
    RunLog log_;

    struct Snapshot {
        double avail_time = 0.0;
        std::vector<Track> tracks;
    };
    std::deque<Snapshot> pending_snapshots_;
    std::vector<Track> visible_tracks_;
    bool have_snapshot_ = false;

    double t_ = 0.0;
    double next_perception_ = 0.0;
    double next_control_ = 0.0;
    LatencyStats latency_;
    double latency_sum_ = 0.0;
    std::vector<AdaptEvent> adapt_events_;
    std::vector<double> adapt_event_times_;
    std::string pending_event_;

    // Command provenance: capture time of the pose behind each in-flight
    // command, keyed by channel send order per drone.
    std::map<int, std::deque<double>> inflight_capture_times_;
};

}  // namespace navsim
