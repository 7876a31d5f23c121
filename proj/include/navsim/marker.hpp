#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "navsim/errors.hpp"
#include "navsim/geometry.hpp"

namespace navsim {

/// Concentric circular marker: white disc inside a black annulus.
struct MarkerSpec {
    double outer_diameter = 0.055;  // meters
    double inner_diameter = 0.02;

    double radius_ratio() const { return inner_diameter / outer_diameter; }
};

/// Grayscale raster frame, 0 = black, 255 = white.
struct Frame {
    int width = 640;
    int height = 480;
    std::vector<uint8_t> pixels;
    double timestamp = 0.0;

    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

void write_pgm(const Frame& frame, const std::string& path);

/// A marker placed in the world. The circle is rotation-symmetric about its
/// normal, so position + normal fully determine the rendering.
struct MarkerPlacement {
    MarkerSpec spec;
    Vec3 center = Vec3::Zero();        // world meters
    Vec3 normal = Vec3::UnitZ();       // world, unit length
};

/// Render markers into a frame: white background, anti-aliased black annulus
/// with white interior per marker, nearest surface winning along each ray.
/// Markers outside the field of view are simply absent.
Frame render(const std::vector<MarkerPlacement>& markers, const CameraModel& cam,
             double timestamp = 0.0);

struct Detection {
    Vec2 center = Vec2::Zero();      // subpixel
    double outer_radius_px = 0.0;
    double inner_radius_px = 0.0;
    double concentricity_px = 0.0;   // inner vs outer centroid offset
    double area_px = 0.0;            // full disc area
};

struct DetectorParams {
    MarkerSpec spec;
    double ratio_tolerance = 0.25;     // relative to spec.radius_ratio()
    double max_concentricity_px = 2.0;
    double min_area_px = 12.0;
};

/// Threshold + flood-fill segmentation. A detection is a dark component
/// enclosing a bright region whose radii match the marker ratio within
/// tolerance and whose centers agree within the concentricity limit. At most
/// `expected_count` detections are returned, largest area first.
class MarkerDetector {
public:
    explicit MarkerDetector(const DetectorParams& params = {}) : params_(params) {}

    std::vector<Detection> detect(const Frame& frame, int expected_count);

private:
    DetectorParams params_;
    // Scratch reused across frames.
    std::vector<int> label_;
    int generation_ = 0;
    std::vector<int> queue_;
};

/// Recover the 3D position from the apparent size: depth from similar
/// triangles on the outer diameter, x/y from the ray through the center.
/// Orientation is not estimated. Throws ZeroRadius on a degenerate detection.
WhyConPose localize(const Detection& d, const CameraModel& cam, const MarkerSpec& spec,
                    const UnitScale& scale = {}, double timestamp = 0.0);

struct Track {
    int id = 0;
    WhyConPose pose;
    int miss_count = 0;
};

struct TrackerState {
    int expected_count = 0;  // n
    int max_count = 0;
    int miss_window = 5;     // M frames before a re-initialization
    std::vector<Track> tracks;
    int next_id = 0;

    // Persistence counter for an unassigned blob (candidate new target).
    int pending_new_frames = 0;
    WhyConPose pending_new_pose;

    const Track* find(int id) const;
};

/// Tracker seeded with per-id start positions, as assigned at start-up.
TrackerState init_tracker(const std::vector<WhyConPose>& start_poses, int max_count,
                          int miss_window = 5);

struct TrackReport {
    bool ambiguous = false;               // a distance tie was broken by index
    std::vector<int> assigned_ids;        // per detection; -1 if unassigned
};

/// Greedy nearest-neighbor association of localized detections to tracks
/// (closest pair first). Matched tracks take the detection pose; unmatched
/// tracks age via miss_count. Ties within 1e-9 break toward the lower
/// detection index and are reported.
TrackReport track(TrackerState& tracker, const std::vector<WhyConPose>& detections);

struct AdaptEvent {
    std::optional<int> removed_id;
    std::optional<int> added_id;
    int new_count = 0;
};

/// Dynamic target-count adaptation: a track missing for the full miss window
/// drops n by one; a persistent unassigned blob raises it again (up to
/// max_count). Surviving tracks keep their ids and poses.
std::optional<AdaptEvent> adapt_count(TrackerState& tracker);

constexpr double kEqualZThreshold = 0.05;  // WhyCon units

struct DronePlatformLabels {
    WhyConPose drone;
    WhyConPose platform;
};

/// The drone flies nearer the overhead camera than the platform, so the
/// smaller z is the drone. Returns nullopt when the two z values are within
/// kEqualZThreshold (caller should hold its previous labels).
std::optional<DronePlatformLabels> disambiguate_by_z(const WhyConPose& a,
                                                     const WhyConPose& b);

}  // namespace navsim
