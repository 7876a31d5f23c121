#include "navsim/runlog.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "navsim/errors.hpp"

namespace navsim {

namespace {

void append_csv_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out += buf;
}

}  // namespace

std::string RunLog::csv_string() const {
    std::string out =
        "t,drone,truth_x,truth_y,truth_z,est_valid,est_x,est_y,est_z,"
        "sp_x,sp_y,sp_z,err_x,err_y,err_z,pwm_roll,pwm_pitch,pwm_yaw,pwm_throttle,"
        "in_fov,event\n";
    for (const auto& r : rows) {
        append_csv_double(out, r.t);
        out += ',';
        out += std::to_string(r.drone_id);
        for (int i = 0; i < 3; ++i) {
            out += ',';
            append_csv_double(out, r.truth[i]);
        }
        out += ',';
        out += r.estimate_valid ? '1' : '0';
        for (int i = 0; i < 3; ++i) {
            out += ',';
            append_csv_double(out, r.estimate[i]);
        }
        for (int i = 0; i < 3; ++i) {
            out += ',';
            append_csv_double(out, r.setpoint[i]);
        }
        for (int i = 0; i < 3; ++i) {
            out += ',';
            append_csv_double(out, r.error[i]);
        }
        for (int i = 0; i < 4; ++i) {
            out += ',';
            out += std::to_string(r.pwm[i]);
        }
        out += ',';
        out += r.truth_in_fov ? '1' : '0';
        out += ',';
        out += r.event;
        out += '\n';
    }
    return out;
}

void RunLog::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    const std::string s = csv_string();
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

MetricsSummary compute_metrics(const RunLog& log, std::optional<int> drone_id) {
    std::vector<const LogRow*> rows;
    for (const auto& r : log.rows) {
        if (!drone_id || r.drone_id == *drone_id) {
            rows.push_back(&r);
        }
    }
    if (rows.empty()) {
        throw EmptyLog("compute_metrics: no rows");
    }

    MetricsSummary m;
    m.samples = rows.size();
    m.duration_s = rows.back()->t - rows.front()->t;

    size_t valid = 0;
    for (const auto* r : rows) {
        if (!r->estimate_valid) {
            continue;
        }
        ++valid;
        for (int i = 0; i < 3; ++i) {
            m.max_abs_error[i] = std::max(m.max_abs_error[i], std::abs(r->error[i]));
            m.mean_error[i] += r->error[i];
            m.mean_abs_error[i] += std::abs(r->error[i]);
        }
    }
    if (valid > 0) {
        m.mean_error /= static_cast<double>(valid);
        m.mean_abs_error /= static_cast<double>(valid);
    }

    // Out-of-frame: first time the estimate is gone while truth is outside
    // the field of view.
    for (const auto* r : rows) {
        if (!r->estimate_valid && !r->truth_in_fov) {
            m.out_of_frame_time_s = r->t;
            break;
        }
    }

    // Step analysis per axis: a setpoint change opens a window until the
    // next change. Overshoot is the peak past the new setpoint over the step
    // magnitude; settling is entry into the 5% band without leaving again.
    for (int axis = 0; axis < 3; ++axis) {
        size_t idx = 0;
        while (idx + 1 < rows.size()) {
            size_t change = idx + 1;
            while (change < rows.size()
                   && rows[change]->setpoint[axis] == rows[idx]->setpoint[axis]) {
                ++change;
            }
            if (change >= rows.size()) {
                break;
            }
            const double sp_new = rows[change]->setpoint[axis];
            const double sp_old = rows[idx]->setpoint[axis];
            const double magnitude = sp_new - sp_old;
            size_t window_end = change + 1;
            while (window_end < rows.size()
                   && rows[window_end]->setpoint[axis] == sp_new) {
                ++window_end;
            }
            StepStats st;
            st.t_step = rows[change]->t;
            st.magnitude = std::abs(magnitude);
            if (st.magnitude > 0.0) {
                const double dir = magnitude > 0.0 ? 1.0 : -1.0;
                double peak = 0.0;
                double last_out_of_band = rows[change]->t;
                bool settled = false;
                const double band = 0.05 * st.magnitude;
                for (size_t k = change; k < window_end; ++k) {
                    if (!rows[k]->estimate_valid) {
                        continue;
                    }
                    const double value = rows[k]->estimate[axis];
                    peak = std::max(peak, dir * (value - sp_new));
                    if (std::abs(value - sp_new) > band) {
                        last_out_of_band = rows[k]->t;
                        settled = false;
                    } else {
                        settled = true;
                    }
                }
                st.overshoot_fraction = peak / st.magnitude;
                st.settle_time_s = settled ? last_out_of_band - rows[change]->t : -1.0;
                m.steps[axis].push_back(st);
            }
            idx = change;
        }
    }
    return m;
}

nlohmann::json metrics_to_json(const MetricsSummary& m) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["samples"] = m.samples;
    j["duration_s"] = m.duration_s;
    j["max_abs_error"] = {m.max_abs_error.x(), m.max_abs_error.y(), m.max_abs_error.z()};
    j["mean_error"] = {m.mean_error.x(), m.mean_error.y(), m.mean_error.z()};
    j["mean_abs_error"] = {m.mean_abs_error.x(), m.mean_abs_error.y(), m.mean_abs_error.z()};
    j["out_of_frame_time_s"] = m.out_of_frame_time_s;
    const char* axis_names[3] = {"x", "y", "z"};
    for (int axis = 0; axis < 3; ++axis) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : m.steps[axis]) {
            steps.push_back({{"t", s.t_step},
                             {"magnitude", s.magnitude},
                             {"overshoot_fraction", s.overshoot_fraction},
                             {"settle_time_s", s.settle_time_s}});
        }
        j["steps"][axis_names[axis]] = steps;
    }
    return j;
}

}  // namespace navsim
