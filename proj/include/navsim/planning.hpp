#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "navsim/control.hpp"
#include "navsim/errors.hpp"
#include "navsim/geometry.hpp"

namespace navsim {

struct Aabb {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

/// Hoop obstacle: a torus plus an annular wall in the hoop plane, so valid
/// paths go through the opening rather than skimming the rim.
struct Hoop {
    Vec3 center = Vec3::Zero();   // WhyCon units
    Vec3 axis = Vec3::UnitX();    // unit vector
    double inner_radius = 2.5;    // opening radius
    double tube_radius = 0.3;
    double wall_extent = 2.0;     // annular wall width beyond the ring circle

    double ring_radius() const { return inner_radius + tube_radius; }
};

struct Scene3D {
    Aabb bounds;
    std::vector<Hoop> hoops;
    std::vector<Aabb> boxes;
};

/// Distance from p to the hoop torus surface (negative inside the tube).
double torus_distance(const Hoop& hoop, const Vec3& p);

/// True iff the point, inflated by the drone radius, clears every obstacle
/// and stays inside the scene bounds.
bool collision_free(const Scene3D& scene, const Vec3& p, double drone_radius);

/// Segment check by dense sampling at the given step.
bool segment_collision_free(const Scene3D& scene, const Vec3& a, const Vec3& b,
                            double drone_radius, double step = 0.05);

struct PathPlan {
    std::vector<Setpoint> waypoints;  // >= 50 after resampling
    double cost = 0.0;                // polyline length, WhyCon units
    double planning_time_s = 0.0;
    uint64_t seed = 0;
    int iterations = 0;
};

struct RrtOptions {
    double steer_step = 0.5;          // units
    double gamma = 2.0;               // neighbor radius = gamma*(log n/n)^(1/3)
    double goal_bias = 0.05;
    double goal_tolerance = 0.5;      // connect distance to the goal
    double drone_radius = 0.7;
    double collision_step = 0.05;
    int max_iterations = 6000;
    double max_seconds = 20.0;        // per-path budget
    uint64_t seed = 1;
    int min_waypoints = 50;
};

/// RRT* with rewiring. Returns the lowest-cost path found within the budget,
/// resampled to at least `min_waypoints` points. Throws InvalidEndpoint if
/// start or goal collide and NoPathFound if the budget expires without a
/// goal connection.
PathPlan rrt_star(const Scene3D& scene, const Vec3& start, const Vec3& goal,
                  const RrtOptions& opts);

/// Arc-length-uniform resampling to exactly max(n, input size) points with
/// endpoints preserved. Re-checks the resampled polyline against the scene;
/// throws CollisionAfterResample if a chord cuts an obstacle.
PathPlan resample(const PathPlan& plan, int n, const Scene3D& scene,
                  double drone_radius, double collision_step = 0.05);

/// Pure geometric resampling (no scene check), used by the planner before
/// validation.
std::vector<Setpoint> resample_polyline(const std::vector<Setpoint>& points, int n);

struct HoopTraversal {
    std::vector<PathPlan> plans;  // 3 per hoop: approach, through, depart
};

struct HoopTraversalOptions {
    RrtOptions rrt;
    double standoff = 3.0;  // entry/exit distance from the hoop plane, units
};

/// Three paths per hoop: to the entry point on the axis, straight through
/// along the axis, and away on the far side. Throws NoPathFound (with the
/// hoop index in the message) if any leg cannot be planned.
HoopTraversal hoop_traversal_plan(const Scene3D& scene, const std::vector<int>& hoop_sequence,
                                  const Vec3& start, const HoopTraversalOptions& opts);

/// Formation arc generator, angles in degrees:
/// x = r*sin(10a + dist_apart*wc_id), y = r*cos(10a + dist_apart*wc_id).
struct FormationParams {
    double radius = 5.0;        // r, WhyCon units
    double dist_apart = 0.0;    // degrees between drones
    int wc_id = 0;              // drone index
    int step = 0;               // a in [0, 36]
    Vec3 center = Vec3::Zero(); // offset; z supplies the hold altitude
};

Setpoint formation_waypoint(const FormationParams& params);

/// Square traversal for exactly 3 drones: drones 0 and 1 walk the vertices
/// two apart (diagonally opposite); drone 2 holds the center. Throws
/// WrongDroneCount unless drone_count is 3.
std::vector<std::vector<Setpoint>> square_formation(double side, const Vec3& center,
                                                    int drone_count = 3);

}  // namespace navsim
