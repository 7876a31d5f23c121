#include "navsim/planning.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <random>

namespace navsim {

double torus_distance(const Hoop& hoop, const Vec3& p) {
    const Vec3 v = p - hoop.center;
    const double h = v.dot(hoop.axis);
    const Vec3 radial = v - h * hoop.axis;
    const double rho = radial.norm();
    const double ring = hoop.ring_radius();
    return std::sqrt((rho - ring) * (rho - ring) + h * h) - hoop.tube_radius;
}

namespace {

// Distance from p to the annular wall disc lying in the hoop plane between
// the ring circle and ring + wall_extent.
double wall_distance(const Hoop& hoop, const Vec3& p) {
    const Vec3 v = p - hoop.center;
    const double h = v.dot(hoop.axis);
    const Vec3 radial = v - h * hoop.axis;
    const double rho = radial.norm();
    const double r_in = hoop.ring_radius();
    const double r_out = r_in + hoop.wall_extent;
    const double rho_clamped = std::clamp(rho, r_in, r_out);
    const double dr = rho - rho_clamped;
    return std::sqrt(dr * dr + h * h);
}

double box_distance(const Aabb& box, const Vec3& p) {
    Vec3 d = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
        if (p[i] < box.min[i]) {
            d[i] = box.min[i] - p[i];
        } else if (p[i] > box.max[i]) {
            d[i] = p[i] - box.max[i];
        }
    }
    const double outside = d.norm();
    if (outside > 0.0) {
        return outside;
    }
    // Inside: negative penetration depth.
    double depth = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        depth = std::min(depth, std::min(p[i] - box.min[i], box.max[i] - p[i]));
    }
    return -depth;
}

}  // namespace

bool collision_free(const Scene3D& scene, const Vec3& p, double drone_radius) {
    if (!scene.bounds.contains(p)) {
        return false;
    }
    for (const auto& hoop : scene.hoops) {
        if (torus_distance(hoop, p) <= drone_radius) {
            return false;
        }
        if (wall_distance(hoop, p) <= drone_radius) {
            return false;
        }
    }
    for (const auto& box : scene.boxes) {
        if (box_distance(box, p) <= drone_radius) {
            return false;
        }
    }
    return true;
}

bool segment_collision_free(const Scene3D& scene, const Vec3& a, const Vec3& b,
                            double drone_radius, double step) {
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) {
        const Vec3 p = a + (b - a) * (static_cast<double>(i) / n);
        if (!collision_free(scene, p, drone_radius)) {
            return false;
        }
    }
    return true;
}

std::vector<Setpoint> resample_polyline(const std::vector<Setpoint>& points, int n) {
    const int count = std::max(n, static_cast<int>(points.size()));
    std::vector<Setpoint> out;
    out.reserve(count);
    if (points.size() == 1) {
        out.assign(count, points.front());
        return out;
    }

    std::vector<double> cumulative(points.size(), 0.0);
    for (size_t i = 1; i < points.size(); ++i) {
        cumulative[i] =
            cumulative[i - 1] + (points[i].vec() - points[i - 1].vec()).norm();
    }
    const double total = cumulative.back();
    if (total <= 0.0) {
        out.assign(count, points.front());
        return out;
    }

    size_t seg = 0;
    for (int i = 0; i < count; ++i) {
        const double target = total * static_cast<double>(i) / (count - 1);
        while (seg + 1 < points.size() - 1 && cumulative[seg + 1] < target) {
            ++seg;
        }
        const double seg_len = cumulative[seg + 1] - cumulative[seg];
        const double t = seg_len > 0.0 ? (target - cumulative[seg]) / seg_len : 0.0;
        const Vec3 p = points[seg].vec() + t * (points[seg + 1].vec() - points[seg].vec());
        out.push_back({p.x(), p.y(), p.z()});
    }
    // Endpoints exact.
    out.front() = points.front();
    out.back() = points.back();
    return out;
}

namespace {

double polyline_cost(const std::vector<Setpoint>& pts) {
    double c = 0.0;
    for (size_t i = 1; i < pts.size(); ++i) {
        c += (pts[i].vec() - pts[i - 1].vec()).norm();
    }
    return c;
}

}  // namespace

PathPlan resample(const PathPlan& plan, int n, const Scene3D& scene, double drone_radius,
                  double collision_step) {
    PathPlan out = plan;
    out.waypoints = resample_polyline(plan.waypoints, n);
    for (size_t i = 1; i < out.waypoints.size(); ++i) {
        if (!segment_collision_free(scene, out.waypoints[i - 1].vec(),
                                    out.waypoints[i].vec(), drone_radius,
                                    collision_step)) {
            throw CollisionAfterResample("resample: chord intersects an obstacle");
        }
    }
    out.cost = polyline_cost(out.waypoints);
    return out;
}

PathPlan rrt_star(const Scene3D& scene, const Vec3& start, const Vec3& goal,
                  const RrtOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    if (!collision_free(scene, start, opts.drone_radius)) {
        throw InvalidEndpoint("rrt_star: start is in collision");
    }
    if (!collision_free(scene, goal, opts.drone_radius)) {
        throw InvalidEndpoint("rrt_star: goal is in collision");
    }

    PathPlan plan;
    plan.seed = opts.seed;

    if ((goal - start).norm() < 1e-12) {
        plan.waypoints.assign(std::max(opts.min_waypoints, 1), {start.x(), start.y(), start.z()});
        plan.cost = 0.0;
        plan.planning_time_s = elapsed();
        return plan;
    }

    struct Node {
        Vec3 p;
        int parent;
        double cost;
    };
    std::vector<Node> nodes;
    nodes.push_back({start, -1, 0.0});

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sample = [&]() -> Vec3 {
        if (unit(rng) < opts.goal_bias) {
            return goal;
        }
        Vec3 p;
        for (int i = 0; i < 3; ++i) {
            p[i] = scene.bounds.min[i]
                 + unit(rng) * (scene.bounds.max[i] - scene.bounds.min[i]);
        }
        return p;
    };

    int best_goal_node = -1;
    double best_goal_cost = std::numeric_limits<double>::infinity();
    int iterations = 0;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if ((iter & 63) == 0 && elapsed() > opts.max_seconds) {
            break;
        }
        ++iterations;

        const Vec3 target = sample();

        // Nearest node.
        int nearest = 0;
        double nearest_d2 = (nodes[0].p - target).squaredNorm();
        for (size_t i = 1; i < nodes.size(); ++i) {
            const double d2 = (nodes[i].p - target).squaredNorm();
            if (d2 < nearest_d2) {
                nearest_d2 = d2;
                nearest = static_cast<int>(i);
            }
        }

        // Steer toward the sample.
        Vec3 to = target - nodes[nearest].p;
        const double dist = to.norm();
        if (dist < 1e-12) {
            continue;
        }
        const Vec3 p_new = dist > opts.steer_step
                               ? Vec3(nodes[nearest].p + to * (opts.steer_step / dist))
                               : target;
        if (!collision_free(scene, p_new, opts.drone_radius)) {
            continue;
        }

        // Shrinking neighbor radius.
        const double n_count = static_cast<double>(nodes.size());
        const double radius =
            opts.gamma * std::cbrt(std::log(std::max(n_count, 2.0)) / n_count);

        // Choose the cheapest valid parent among neighbors (nearest included).
        std::vector<int> neighbors;
        for (size_t i = 0; i < nodes.size(); ++i) {
            if ((nodes[i].p - p_new).norm() <= std::max(radius, opts.steer_step)) {
                neighbors.push_back(static_cast<int>(i));
            }
        }
        int parent = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int idx : neighbors) {
            const double c = nodes[idx].cost + (nodes[idx].p - p_new).norm();
            if (c < best_cost
                && segment_collision_free(scene, nodes[idx].p, p_new, opts.drone_radius,
                                          opts.collision_step)) {
                best_cost = c;
                parent = idx;
            }
        }
        if (parent < 0) {
            continue;
        }
        nodes.push_back({p_new, parent, best_cost});
        const int new_idx = static_cast<int>(nodes.size()) - 1;

        // Rewire neighbors through the new node when cheaper.
        for (int idx : neighbors) {
            if (idx == parent) {
                continue;
            }
            const double c = best_cost + (nodes[idx].p - p_new).norm();
            if (c + 1e-12 < nodes[idx].cost
                && segment_collision_free(scene, p_new, nodes[idx].p, opts.drone_radius,
                                          opts.collision_step)) {
                nodes[idx].parent = new_idx;
                nodes[idx].cost = c;
            }
        }

        // Try to connect the goal.
        const double goal_dist = (p_new - goal).norm();
        if (goal_dist <= opts.goal_tolerance
            && segment_collision_free(scene, p_new, goal, opts.drone_radius,
                                      opts.collision_step)) {
            const double total = best_cost + goal_dist;
            if (total < best_goal_cost) {
                best_goal_cost = total;
                best_goal_node = new_idx;
            }
        }
    }

    if (best_goal_node < 0) {
        throw NoPathFound("rrt_star: no goal connection within budget");
    }

    // Costs may have improved by rewiring after the connection was recorded;
    // recompute the final cost along the tree.
    std::vector<Setpoint> pts;
    for (int idx = best_goal_node; idx >= 0; idx = nodes[idx].parent) {
        pts.push_back({nodes[idx].p.x(), nodes[idx].p.y(), nodes[idx].p.z()});
    }
    std::reverse(pts.begin(), pts.end());
    pts.push_back({goal.x(), goal.y(), goal.z()});

    plan.waypoints = resample_polyline(pts, opts.min_waypoints);
    plan.cost = polyline_cost(plan.waypoints);
    plan.iterations = iterations;
    plan.planning_time_s = elapsed();
    return plan;
}

HoopTraversal hoop_traversal_plan(const Scene3D& scene, const std::vector<int>& hoop_sequence,
                                  const Vec3& start, const HoopTraversalOptions& opts) {
    HoopTraversal out;
    Vec3 current = start;
    uint64_t seed = opts.rrt.seed;

    for (size_t k = 0; k < hoop_sequence.size(); ++k) {
        const Hoop& hoop = scene.hoops.at(static_cast<size_t>(hoop_sequence[k]));
        // Entry on the side facing the current position.
        const double side = (current - hoop.center).dot(hoop.axis) >= 0.0 ? 1.0 : -1.0;
        const Vec3 entry = hoop.center + side * opts.standoff * hoop.axis;
        const Vec3 exit = hoop.center - side * opts.standoff * hoop.axis;
        const Vec3 depart = hoop.center - side * 2.0 * opts.standoff * hoop.axis;

        RrtOptions leg = opts.rrt;
        auto plan_leg = [&](const Vec3& a, const Vec3& b, const char* name) {
            leg.seed = seed++;
            try {
                return rrt_star(scene, a, b, leg);
            } catch (const NoPathFound&) {
                throw NoPathFound("hoop_traversal_plan: hoop " + std::to_string(k)
                                  + " " + name + " leg failed");
            }
        };

        out.plans.push_back(plan_leg(current, entry, "approach"));
        out.plans.push_back(plan_leg(entry, exit, "through"));
        out.plans.push_back(plan_leg(exit, depart, "depart"));
        current = depart;
    }
    return out;
}

Setpoint formation_waypoint(const FormationParams& params) {
    const double deg = 10.0 * params.step + params.dist_apart * params.wc_id;
    const double rad = deg * M_PI / 180.0;
    Setpoint sp;
    sp.x = params.radius * std::sin(rad) + params.center.x();
    sp.y = params.radius * std::cos(rad) + params.center.y();
    sp.z = params.center.z();
    return sp;
}

std::vector<std::vector<Setpoint>> square_formation(double side, const Vec3& center,
                                                    int drone_count) {
    if (drone_count != 3) {
        throw WrongDroneCount("square_formation: exactly 3 drones required");
    }
    const double h = side / 2.0;
    const std::array<Vec2, 4> vertices = {Vec2(h, h), Vec2(-h, h), Vec2(-h, -h),
                                          Vec2(h, -h)};
    std::vector<std::vector<Setpoint>> schedule(3);
    for (int step = 0; step < 4; ++step) {
        const Vec2 v0 = vertices[step % 4];
        const Vec2 v1 = vertices[(step + 2) % 4];  // diagonally opposite
        schedule[0].push_back({center.x() + v0.x(), center.y() + v0.y(), center.z()});
        schedule[1].push_back({center.x() + v1.x(), center.y() + v1.y(), center.z()});
        schedule[2].push_back({center.x(), center.y(), center.z()});
    }
    return schedule;
}

}  // namespace navsim
