#include "navsim/marker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace navsim {

void write_pgm(const Frame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              static_cast<std::streamsize>(frame.pixels.size()));
}

namespace {

struct CamMarker {
    Vec3 center_c;   // camera frame
    Vec3 normal_c;   // unit, camera frame
    double r_outer;  // meters
    double r_inner;
};

// Color of the nearest marker surface along the ray, or background white.
inline int sample_ray(const Vec3& dir, const std::vector<CamMarker>& markers) {
    double best_t = std::numeric_limits<double>::infinity();
    int color = 255;
    for (const auto& m : markers) {
        const double denom = dir.dot(m.normal_c);
        if (std::abs(denom) < 1e-12) {
            continue;
        }
        const double t = m.center_c.dot(m.normal_c) / denom;
        if (t <= 0.0 || t >= best_t) {
            continue;
        }
        const Vec3 hit = t * dir;
        const double rho = (hit - m.center_c).norm();
        if (rho <= m.r_inner) {
            best_t = t;
            color = 255;
        } else if (rho <= m.r_outer) {
            best_t = t;
            color = 0;
        }
    }
    return color;
}

constexpr int kSubsamples = 3;  // 3x3 supersampling

}  // namespace

Frame render(const std::vector<MarkerPlacement>& markers, const CameraModel& cam,
             double timestamp) {
    Frame frame;
    frame.width = cam.width;
    frame.height = cam.height;
    frame.timestamp = timestamp;
    frame.pixels.assign(static_cast<size_t>(cam.width) * cam.height, 255);

    std::vector<CamMarker> cam_markers;
    struct Box {
        int x0, y0, x1, y1;
    };
    std::vector<Box> boxes;

    for (const auto& mk : markers) {
        const Vec3 center_c = cam.to_camera_frame(mk.center);
        if (center_c.z() <= 1e-6) {
            continue;  // behind the camera
        }
        CamMarker cm;
        cm.center_c = center_c;
        cm.normal_c = (cam.world_to_camera.rotation * mk.normal).normalized();
        cm.r_outer = mk.spec.outer_diameter * 0.5;
        cm.r_inner = mk.spec.inner_diameter * 0.5;
        cam_markers.push_back(cm);

        Vec2 uv;
        try {
            uv = project(cam, mk.center);
        } catch (const PointBehindCamera&) {
            continue;
        }
        const double r_px = std::max(cam.fx, cam.fy) * cm.r_outer / center_c.z();
        const int pad = static_cast<int>(std::ceil(r_px * 1.5 + 3.0));
        Box b;
        b.x0 = std::max(0, static_cast<int>(std::floor(uv.x())) - pad);
        b.y0 = std::max(0, static_cast<int>(std::floor(uv.y())) - pad);
        b.x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(uv.x())) + pad);
        b.y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(uv.y())) + pad);
        if (b.x0 <= b.x1 && b.y0 <= b.y1) {
            boxes.push_back(b);
        }
    }

    // Repainting overlapping boxes is harmless: the ray evaluation is a pure
    // function of the pixel, so the result is identical.
    for (const auto& b : boxes) {
        for (int y = b.y0; y <= b.y1; ++y) {
            for (int x = b.x0; x <= b.x1; ++x) {
                int sum = 0;
                for (int sy = 0; sy < kSubsamples; ++sy) {
                    for (int sx = 0; sx < kSubsamples; ++sx) {
                        const double u = x + (sx + 0.5) / kSubsamples;
                        const double v = y + (sy + 0.5) / kSubsamples;
                        const Vec3 dir = pixel_ray(cam, {u, v});
                        sum += sample_ray(dir, cam_markers);
                    }
                }
                frame.pixels[static_cast<size_t>(y) * cam.width + x] =
                    static_cast<uint8_t>((sum + kSubsamples * kSubsamples / 2)
                                         / (kSubsamples * kSubsamples));
            }
        }
    }
    return frame;
}

namespace {

int otsu_threshold(const Frame& frame) {
    uint32_t hist[256] = {0};
    for (uint8_t p : frame.pixels) {
        ++hist[p];
    }
    const double total = static_cast<double>(frame.pixels.size());
    double sum = 0.0;
    for (int i = 0; i < 256; ++i) {
        sum += static_cast<double>(i) * hist[i];
    }
    double sum_b = 0.0;
    double weight_b = 0.0;
    double best_var = -1.0;
    int best_t = -1;
    for (int t = 0; t < 256; ++t) {
        weight_b += hist[t];
        if (weight_b == 0.0) {
            continue;
        }
        const double weight_f = total - weight_b;
        if (weight_f == 0.0) {
            break;
        }
        sum_b += static_cast<double>(t) * hist[t];
        const double mean_b = sum_b / weight_b;
        const double mean_f = (sum - sum_b) / weight_f;
        const double var = weight_b * weight_f * (mean_b - mean_f) * (mean_b - mean_f);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

struct Component {
    std::vector<int> pixels;          // linear indices
    std::vector<int> bright_neighbors;
    int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
};

}  // namespace

std::vector<Detection> MarkerDetector::detect(const Frame& frame, int expected_count) {
    std::vector<Detection> result;
    if (expected_count <= 0) {
        return result;
    }
    const int w = frame.width;
    const int h = frame.height;
    const int thresh = otsu_threshold(frame);
    if (thresh < 0) {
        return result;  // single-intensity frame
    }

    // 0 unvisited, >0 dark component id, -1 background bright, -2 hole bright.
    label_.assign(static_cast<size_t>(w) * h, 0);
    auto dark = [&](int idx) { return frame.pixels[idx] <= thresh; };

    std::vector<Component> comps;
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int idx = y * w + x;
            if (!dark(idx) || label_[idx] != 0) {
                continue;
            }
            const int comp_id = static_cast<int>(comps.size()) + 1;
            comps.emplace_back();
            Component& comp = comps.back();
            queue_.clear();
            queue_.push_back(idx);
            label_[idx] = comp_id;
            while (!queue_.empty()) {
                const int cur = queue_.back();
                queue_.pop_back();
                comp.pixels.push_back(cur);
                const int cx = cur % w;
                const int cy = cur / w;
                comp.x0 = std::min(comp.x0, cx);
                comp.y0 = std::min(comp.y0, cy);
                comp.x1 = std::max(comp.x1, cx);
                comp.y1 = std::max(comp.y1, cy);
                for (int k = 0; k < 4; ++k) {
                    const int nx = cx + dx[k];
                    const int ny = cy + dy[k];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) {
                        continue;
                    }
                    const int nidx = ny * w + nx;
                    if (dark(nidx)) {
                        if (label_[nidx] == 0) {
                            label_[nidx] = comp_id;
                            queue_.push_back(nidx);
                        }
                    } else {
                        comp.bright_neighbors.push_back(nidx);
                    }
                }
            }
        }
    }

    for (auto& comp : comps) {
        if (static_cast<double>(comp.pixels.size()) < params_.min_area_px) {
            continue;
        }
        std::sort(comp.bright_neighbors.begin(), comp.bright_neighbors.end());
        comp.bright_neighbors.erase(
            std::unique(comp.bright_neighbors.begin(), comp.bright_neighbors.end()),
            comp.bright_neighbors.end());

        // Flood each bright neighbor region; one that stays strictly inside
        // the component's box is an enclosed hole, anything that escapes is
        // background.
        std::vector<int> best_hole;
        const int bx0 = comp.x0 - 1, by0 = comp.y0 - 1;
        const int bx1 = comp.x1 + 1, by1 = comp.y1 + 1;
        for (int seed : comp.bright_neighbors) {
            if (label_[seed] != 0) {
                continue;
            }
            std::vector<int> region;
            bool escaped = false;
            queue_.clear();
            queue_.push_back(seed);
            label_[seed] = -2;
            while (!queue_.empty()) {
                const int cur = queue_.back();
                queue_.pop_back();
                region.push_back(cur);
                const int cx = cur % w;
                const int cy = cur / w;
                if (cx <= bx0 || cy <= by0 || cx >= bx1 || cy >= by1 || cx == 0 ||
                    cy == 0 || cx == w - 1 || cy == h - 1) {
                    escaped = true;
                }
                for (int k = 0; k < 4; ++k) {
                    const int nx = cx + dx[k];
                    const int ny = cy + dy[k];
                    if (nx < bx0 || ny < by0 || nx > bx1 || ny > by1 || nx < 0 ||
                        ny < 0 || nx >= w || ny >= h) {
                        continue;
                    }
                    const int nidx = ny * w + nx;
                    if (!dark(nidx) && label_[nidx] == 0) {
                        label_[nidx] = -2;
                        queue_.push_back(nidx);
                    }
                }
            }
            if (escaped) {
                for (int p : region) {
                    label_[p] = -1;
                }
            } else if (region.size() > best_hole.size()) {
                best_hole = std::move(region);
            }
        }
        if (best_hole.empty()) {
            continue;  // filled disc or clipped ring: not a marker
        }

        // Coverage-weighted measurements. Darkness mass over the component
        // and its bright fringe is the annulus area; whiteness mass over the
        // hole and its dark fringe is the inner disc area.
        auto whiteness = [&](int idx) { return frame.pixels[idx] / 255.0; };

        double m_in = 0.0;
        Vec2 c_in = Vec2::Zero();
        std::vector<int> hole_dark_fringe;
        for (int p : best_hole) {
            const double wgt = whiteness(p);
            const Vec2 pc(p % w + 0.5, p / w + 0.5);
            m_in += wgt;
            c_in += wgt * pc;
            const int cx = p % w;
            const int cy = p / w;
            for (int k = 0; k < 4; ++k) {
                const int nx = cx + dx[k];
                const int ny = cy + dy[k];
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) {
                    continue;
                }
                const int nidx = ny * w + nx;
                if (dark(nidx)) {
                    hole_dark_fringe.push_back(nidx);
                }
            }
        }
        std::sort(hole_dark_fringe.begin(), hole_dark_fringe.end());
        hole_dark_fringe.erase(
            std::unique(hole_dark_fringe.begin(), hole_dark_fringe.end()),
            hole_dark_fringe.end());
        for (int p : hole_dark_fringe) {
            const double wgt = whiteness(p);
            m_in += wgt;
            c_in += wgt * Vec2(p % w + 0.5, p / w + 0.5);
        }
        if (m_in <= 0.0) {
            continue;
        }
        c_in /= m_in;

        double m_ann = 0.0;
        Vec2 c_ann = Vec2::Zero();
        for (int p : comp.pixels) {
            const double wgt = 1.0 - whiteness(p);
            m_ann += wgt;
            c_ann += wgt * Vec2(p % w + 0.5, p / w + 0.5);
        }
        for (int p : comp.bright_neighbors) {
            const double wgt = 1.0 - whiteness(p);
            m_ann += wgt;
            c_ann += wgt * Vec2(p % w + 0.5, p / w + 0.5);
        }
        if (m_ann <= 0.0) {
            continue;
        }
        c_ann /= m_ann;

        Detection det;
        det.inner_radius_px = std::sqrt(m_in / M_PI);
        det.area_px = m_ann + m_in;
        det.outer_radius_px = std::sqrt(det.area_px / M_PI);
        det.center = c_ann;
        det.concentricity_px = (c_in - c_ann).norm();

        const double ratio = det.inner_radius_px / det.outer_radius_px;
        const double expected = params_.spec.radius_ratio();
        if (std::abs(ratio - expected) > params_.ratio_tolerance * expected) {
            continue;
        }
        if (det.concentricity_px > params_.max_concentricity_px) {
            continue;
        }
        result.push_back(det);
    }

    std::sort(result.begin(), result.end(),
              [](const Detection& a, const Detection& b) { return a.area_px > b.area_px; });
    if (static_cast<int>(result.size()) > expected_count) {
        result.resize(expected_count);
    }
    return result;
}

WhyConPose localize(const Detection& d, const CameraModel& cam, const MarkerSpec& spec,
                    const UnitScale& scale, double timestamp) {
    if (d.outer_radius_px <= 0.0) {
        throw ZeroRadius("localize: outer radius is zero");
    }
    const Vec2 norm_dist((d.center.x() - cam.cx) / cam.fx,
                         (d.center.y() - cam.cy) / cam.fy);
    const Vec2 n = undistort(cam, norm_dist);

    // First-order correction of the apparent radius for the local distortion
    // scale (radial and tangential stretch differ off-axis).
    const double rho2 = n.squaredNorm();
    const double tangential = 1.0 + cam.k1 * rho2 + cam.k2 * rho2 * rho2;
    const double radial = 1.0 + 3.0 * cam.k1 * rho2 + 5.0 * cam.k2 * rho2 * rho2;
    const double scale_px = std::sqrt(std::max(tangential * radial, 1e-12));

    const double f = 0.5 * (cam.fx + cam.fy);
    const double depth_m = f * (spec.outer_diameter * 0.5) / (d.outer_radius_px / scale_px);

    const Vec3 p_cam(n.x() * depth_m, n.y() * depth_m, depth_m);
    const Vec3 units = meters_to_units(p_cam, scale);

    WhyConPose pose;
    pose.x = units.x();
    pose.y = units.y();
    pose.z = units.z();
    pose.timestamp = timestamp;
    return pose;
}

const Track* TrackerState::find(int id) const {
    for (const auto& t : tracks) {
        if (t.id == id) {
            return &t;
        }
    }
    return nullptr;
}

TrackerState init_tracker(const std::vector<WhyConPose>& start_poses, int max_count,
                          int miss_window) {
    TrackerState state;
    state.expected_count = static_cast<int>(start_poses.size());
    state.max_count = std::max(max_count, state.expected_count);
    state.miss_window = miss_window;
    for (size_t i = 0; i < start_poses.size(); ++i) {
        Track t;
        t.id = static_cast<int>(i);
        t.pose = start_poses[i];
        t.pose.id = t.id;
        state.tracks.push_back(t);
    }
    state.next_id = state.expected_count;
    return state;
}

TrackReport track(TrackerState& tracker, const std::vector<WhyConPose>& detections) {
    TrackReport report;
    report.assigned_ids.assign(detections.size(), -1);

    struct Pair {
        double dist;
        int track_idx;
        int det_idx;
    };
    std::vector<Pair> pairs;
    pairs.reserve(tracker.tracks.size() * detections.size());
    for (size_t ti = 0; ti < tracker.tracks.size(); ++ti) {
        for (size_t di = 0; di < detections.size(); ++di) {
            pairs.push_back({(tracker.tracks[ti].pose.vec() - detections[di].vec()).norm(),
                             static_cast<int>(ti), static_cast<int>(di)});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.track_idx != b.track_idx) return a.track_idx < b.track_idx;
        return a.det_idx < b.det_idx;
    });

    std::vector<bool> track_used(tracker.tracks.size(), false);
    std::vector<bool> det_used(detections.size(), false);
    for (size_t k = 0; k < pairs.size(); ++k) {
        const Pair& p = pairs[k];
        if (track_used[p.track_idx] || det_used[p.det_idx]) {
            continue;
        }
        // A near-tie sharing this track or detection is broken by the sort
        // order (lower index first) and reported.
        for (size_t j = k + 1; j < pairs.size(); ++j) {
            if (pairs[j].dist - p.dist > 1e-9) {
                break;
            }
            const bool same_track = pairs[j].track_idx == p.track_idx
                                 && !det_used[pairs[j].det_idx];
            const bool same_det = pairs[j].det_idx == p.det_idx
                               && !track_used[pairs[j].track_idx];
            if (same_track || same_det) {
                report.ambiguous = true;
                break;
            }
        }
        Track& tr = tracker.tracks[p.track_idx];
        const int keep_id = tr.id;
        tr.pose = detections[p.det_idx];
        tr.pose.id = keep_id;
        tr.miss_count = 0;
        track_used[p.track_idx] = true;
        det_used[p.det_idx] = true;
        report.assigned_ids[p.det_idx] = keep_id;
    }

    for (size_t ti = 0; ti < tracker.tracks.size(); ++ti) {
        if (!track_used[ti]) {
            ++tracker.tracks[ti].miss_count;
        }
    }

    bool unmatched_detection = false;
    for (size_t di = 0; di < detections.size(); ++di) {
        if (!det_used[di]) {
            if (!unmatched_detection) {
                tracker.pending_new_pose = detections[di];
            }
            unmatched_detection = true;
        }
    }
    if (unmatched_detection) {
        ++tracker.pending_new_frames;
    } else {
        tracker.pending_new_frames = 0;
    }
    return report;
}

std::optional<AdaptEvent> adapt_count(TrackerState& tracker) {
    int worst = -1;
    for (size_t i = 0; i < tracker.tracks.size(); ++i) {
        if (tracker.tracks[i].miss_count >= tracker.miss_window) {
            if (worst < 0
                || tracker.tracks[i].miss_count > tracker.tracks[worst].miss_count) {
                worst = static_cast<int>(i);
            }
        }
    }
    if (worst >= 0) {
        AdaptEvent ev;
        ev.removed_id = tracker.tracks[worst].id;
        tracker.tracks.erase(tracker.tracks.begin() + worst);
        tracker.expected_count = static_cast<int>(tracker.tracks.size());
        ev.new_count = tracker.expected_count;
        return ev;
    }
    if (tracker.pending_new_frames >= tracker.miss_window
        && tracker.expected_count < tracker.max_count) {
        Track t;
        t.id = tracker.next_id++;
        t.pose = tracker.pending_new_pose;
        t.pose.id = t.id;
        tracker.tracks.push_back(t);
        tracker.expected_count = static_cast<int>(tracker.tracks.size());
        tracker.pending_new_frames = 0;
        AdaptEvent ev;
        ev.added_id = t.id;
        ev.new_count = tracker.expected_count;
        return ev;
    }
    return std::nullopt;
}

std::optional<DronePlatformLabels> disambiguate_by_z(const WhyConPose& a,
                                                     const WhyConPose& b) {
    if (std::abs(a.z - b.z) < kEqualZThreshold) {
        return std::nullopt;
    }
    DronePlatformLabels labels;
    if (a.z < b.z) {
        labels.drone = a;
        labels.platform = b;
    } else {
        labels.drone = b;
        labels.platform = a;
    }
    return labels;
}

}  // namespace navsim
