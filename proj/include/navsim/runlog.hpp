#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "navsim/geometry.hpp"

namespace navsim {

/// One row per drone per control tick.
struct LogRow {
    double t = 0.0;
    int drone_id = 0;
    Vec3 truth = Vec3::Zero();  // WhyCon units
    bool estimate_valid = false;
    Vec3 estimate = Vec3::Zero();
    Vec3 setpoint = Vec3::Zero();
    Vec3 error = Vec3::Zero();  // estimate - setpoint when valid
    std::array<uint16_t, 4> pwm = {1500, 1500, 1500, 1500};  // roll,pitch,yaw,throttle
    bool truth_in_fov = true;
    std::string event;
};

struct RunLog {
    std::vector<LogRow> rows;

    void write_csv(const std::string& path) const;
    std::string csv_string() const;
};

/// Per-axis step response summary: one entry per setpoint change.
struct StepStats {
    double t_step = 0.0;
    double magnitude = 0.0;
    double overshoot_fraction = 0.0;  // peak beyond setpoint / |step|
    double settle_time_s = -1.0;      // into the 5% band; -1 if never settled
};

struct MetricsSummary {
    Vec3 max_abs_error = Vec3::Zero();
    Vec3 mean_error = Vec3::Zero();
    Vec3 mean_abs_error = Vec3::Zero();
    std::array<std::vector<StepStats>, 3> steps;  // per axis
    double out_of_frame_time_s = -1.0;  // first t with no estimate and truth outside FoV
    double duration_s = 0.0;
    size_t samples = 0;
};

/// Error statistics, step overshoot/settle analysis, and loss-of-view time.
/// Throws EmptyLog on an empty log. Rows from all drones are pooled unless
/// `drone_id` is given.
MetricsSummary compute_metrics(const RunLog& log, std::optional<int> drone_id = std::nullopt);

nlohmann::json metrics_to_json(const MetricsSummary& m);

}  // namespace navsim
