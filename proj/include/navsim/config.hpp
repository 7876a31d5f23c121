#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "navsim/control.hpp"
#include "navsim/geometry.hpp"
#include "navsim/marker.hpp"
#include "navsim/msp.hpp"
#include "navsim/planning.hpp"
#include "navsim/vehicle.hpp"

namespace navsim {

enum class ScenarioName {
    PositionHold,
    InternalOnlyDrift,
    WaypointNav,
    ZnAutotune,
    IterativeAutotune,
    MovingPlatformLanding,
    HoopTraversal,
    FormationCircle,
    FormationSquare,
    FormationRotation,
};

ScenarioName parse_scenario_name(const std::string& name);
std::string scenario_name_string(ScenarioName name);
std::vector<std::string> all_scenario_names();

enum class PerceptionMode { Rendered, Direct };

/// Overhead camera mounted at (0, 0, mount_height) looking straight down.
/// The world->camera rotation is the 180-degree turn about y, so WhyCon x
/// runs against world x and WhyCon z grows away from the camera.
struct CameraConfig {
    double fx = 600.0, fy = 600.0;
    double cx = 320.0, cy = 240.0;
    double k1 = 0.0, k2 = 0.0;
    int width = 640, height = 480;
    double fps = 120.0;
    double mount_height_m = 3.5;

    CameraModel model() const;
};

struct NoiseConfig {
    double measurement_std = 0.0;          // WhyCon units per axis (direct mode)
    Vec3 measurement_bias = Vec3::Zero();  // WhyCon units
    Vec3 disturbance_accel = Vec3::Zero(); // m/s^2 on x/y; z entry is m/s on velocity
    double disturbance_sin_amp = 0.0;      // m/s^2, slow sine on x and y
    double disturbance_sin_period_s = 30.0;
};

struct DroneConfig {
    Vec3 start_position = Vec3(0.0, 0.0, 1.0);  // world meters
    DroneParams params;
    double drift_walk_std = 0.0;   // m/s per sqrt(s)
    double drift_alt_rate = 0.0;   // m/s
    bool drift_enabled = false;
};

struct GainsConfig {
    PidGains x;  // pitch axis
    PidGains y;  // roll axis
    PidGains z;  // throttle axis
};

struct ChannelConfig {
    double jitter_std_ms = 0.0;
    double drop_probability = 0.0;
};

struct WaypointNavConfig {
    std::vector<Setpoint> waypoints;
    double arrival_tolerance = 0.8;  // units
    double dwell_s = 2.0;
};

struct PlatformConfig {
    // Closed circular path, world meters.
    Vec2 path_center = Vec2(0.4, 0.0);
    double path_radius_m = 0.4;
    int path_segments = 64;
    double speed_mps = 0.12;
    double deck_height_m = 0.15;
};

struct LandingConfig {
    PlatformConfig platform;
    double approach_clearance_m = 0.7;   // hover height above the deck
    double descend_threshold_units = 0.8;
    double descent_rate_units = 1.2;     // units/s
    double contact_eps_m = 0.03;
    double lead_time_s = 1.2;            // moving-target feedforward horizon
    double min_hover_s = 25.0;           // track the target this long before descending
};

struct HoopScenarioConfig {
    Scene3D scene;
    std::vector<int> sequence;
    HoopTraversalOptions traversal;
    double arrival_tolerance = 0.9;
    double dwell_s = 0.0;
};

struct FormationConfig {
    double radius = 6.0;      // units
    double z = 25.0;          // WhyCon hold altitude
    double dist_apart = 0.0;  // degrees
    double step_period_s = 1.2;
    double square_side = 8.0;
    double square_period_s = 5.0;
};

struct RelayConfig {
    double amplitude = 100.0;  // PWM offset
    int cycles = 5;
    double hysteresis = 0.05;  // units
    std::string controller_type = "Classic PID";
    double setpoint_z = 25.0;
};

struct IterativeAutotuneConfig {
    std::array<AxisRanges, 3> ranges;
    double threshold = 1.0;
    double threshold_prime = 0.5;
    double trial_duration_s = 6.0;
    double trial_step_units = 2.0;
};

struct ScenarioConfig {
    ScenarioName scenario = ScenarioName::PositionHold;
    CameraConfig camera;
    PerceptionMode perception = PerceptionMode::Direct;
    std::vector<DroneConfig> drones;
    GainsConfig gains;
    LatencyBudget latency;
    ChannelConfig channel;
    double pid_time_s = 0.1;
    double buffer_s = 0.01;
    NoiseConfig noise;
    MarkerSpec marker_spec;
    UnitScale unit_scale;
    uint64_t seed = 1;
    double duration_s = 60.0;
    Setpoint hold_setpoint;
    std::optional<EllipsoidZCorrection> z_correction;
    int tracker_miss_window = 5;

    WaypointNavConfig waypoint_nav;
    LandingConfig landing;
    HoopScenarioConfig hoop;
    FormationConfig formation;
    RelayConfig relay;
    IterativeAutotuneConfig autotune;

    std::string out_dir;

    LoopTiming timing() const { return compute_sample_time(camera.fps, pid_time_s, buffer_s); }
    void validate() const;  // throws ConfigError with a field path
};

/// Built-in defaults for each scenario, as JSON (the schema reference).
nlohmann::json default_config_json(ScenarioName name);

/// Parse a full config object. Unknown scenario names, malformed fields and
/// violated invariants raise ConfigError naming the field.
ScenarioConfig parse_config(const nlohmann::json& j);

/// Defaults for `name` overlaid with optional file content (JSON merge).
ScenarioConfig make_config(ScenarioName name, const std::optional<std::string>& config_path);

nlohmann::json config_to_json(const ScenarioConfig& cfg);

}  // namespace navsim
