#pragma once

#include <string>

#include <json.hpp>

#include "navsim/config.hpp"
#include "navsim/runlog.hpp"
#include "navsim/sim.hpp"

namespace navsim {

struct ScenarioResult {
    bool success = false;
    RunLog log;
    nlohmann::json metrics;
    std::string summary;
};

/// Run one scenario end to end on the simulated clock. Deterministic for a
/// fixed (config, seed). Throws ConfigError for invalid configs and
/// ScenarioAborted when a tuning procedure fails irrecoverably.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Landing-specific entry point: success flag plus touchdown error, per the
/// moving-platform procedure. Equivalent to run_scenario for the landing
/// scenario but with a typed result.
struct LandingOutcome {
    bool success = false;
    bool timed_out = false;
    double touchdown_offset_units = -1.0;
    double touchdown_time_s = -1.0;
};

LandingOutcome landing_scenario(const ScenarioConfig& cfg, ScenarioResult* detail = nullptr);

/// Waypoint list IO: plans are consumable as waypoint schedules.
nlohmann::json waypoints_to_json(const std::vector<Setpoint>& waypoints);
std::vector<Setpoint> waypoints_from_json(const nlohmann::json& j);

}  // namespace navsim
