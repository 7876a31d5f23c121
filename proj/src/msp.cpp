#include "navsim/msp.hpp"

#include <algorithm>

namespace navsim {

uint8_t msp_checksum(uint8_t size, uint8_t id, const std::vector<uint8_t>& payload) {
    uint8_t cs = static_cast<uint8_t>(size ^ id);
    for (uint8_t b : payload) {
        cs ^= b;
    }
    return cs;
}

std::vector<uint8_t> encode(const MspFrame& frame) {
    if (frame.payload.size() > 255) {
        throw PayloadTooLarge("msp encode: payload exceeds 255 bytes");
    }
    std::vector<uint8_t> out;
    out.reserve(6 + frame.payload.size());
    out.push_back('$');
    out.push_back('M');
    out.push_back(frame.direction == MspDirection::ToDrone ? '<' : '>');
    const uint8_t size = static_cast<uint8_t>(frame.payload.size());
    out.push_back(size);
    out.push_back(frame.command_id);
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    out.push_back(msp_checksum(size, frame.command_id, frame.payload));
    return out;
}

std::vector<uint8_t> encode(const CommandMessage& cmd) {
    const uint16_t channels[8] = {cmd.rc_roll, cmd.rc_pitch, cmd.rc_yaw, cmd.rc_throttle,
                                  cmd.rc_aux1, cmd.rc_aux2, cmd.rc_aux3, cmd.rc_aux4};
    MspFrame frame;
    frame.direction = MspDirection::ToDrone;
    frame.command_id = kMspSetRawRc;
    frame.payload.reserve(16);
    for (uint16_t ch : channels) {
        if (ch < kPwmMin || ch > kPwmMax) {
            throw ChannelOutOfRange("msp encode: channel outside [1000, 2000]");
        }
        frame.payload.push_back(static_cast<uint8_t>(ch & 0xFF));
        frame.payload.push_back(static_cast<uint8_t>(ch >> 8));
    }
    return encode(frame);
}

CommandMessage decode_command(const MspFrame& frame, int drone_index) {
    if (frame.command_id != kMspSetRawRc || frame.payload.size() != 16) {
        throw BadHeader("decode_command: not a SET_RAW_RC frame");
    }
    uint16_t ch[8];
    for (int i = 0; i < 8; ++i) {
        ch[i] = static_cast<uint16_t>(frame.payload[2 * i]
                                      | (frame.payload[2 * i + 1] << 8));
    }
    CommandMessage cmd;
    cmd.rc_roll = ch[0];
    cmd.rc_pitch = ch[1];
    cmd.rc_yaw = ch[2];
    cmd.rc_throttle = ch[3];
    cmd.rc_aux1 = ch[4];
    cmd.rc_aux2 = ch[5];
    cmd.rc_aux3 = ch[6];
    cmd.rc_aux4 = ch[7];
    cmd.drone_index = drone_index;
    return cmd;
}

MspFrame decode_frame(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 6 || bytes[0] != '$' || bytes[1] != 'M'
        || (bytes[2] != '<' && bytes[2] != '>')) {
        throw BadHeader("msp decode: malformed header");
    }
    const uint8_t size = bytes[3];
    if (bytes.size() != static_cast<size_t>(6 + size)) {
        throw BadHeader("msp decode: length mismatch");
    }
    MspFrame frame;
    frame.direction = bytes[2] == '<' ? MspDirection::ToDrone : MspDirection::FromDrone;
    frame.command_id = bytes[4];
    frame.payload.assign(bytes.begin() + 5, bytes.begin() + 5 + size);
    if (msp_checksum(size, frame.command_id, frame.payload) != bytes.back()) {
        throw ChecksumMismatch("msp decode: checksum mismatch");
    }
    return frame;
}

std::vector<MspFrame> FrameDecoder::feed(const uint8_t* data, size_t len) {
    std::vector<MspFrame> frames;
    for (size_t i = 0; i < len; ++i) {
        const uint8_t b = data[i];
        switch (state_) {
            case State::Sync:
                if (b == '$') {
                    state_ = State::GotDollar;
                } else {
                    ++header_skips_;
                }
                break;
            case State::GotDollar:
                if (b == 'M') {
                    state_ = State::GotM;
                } else {
                    ++header_skips_;
                    state_ = b == '$' ? State::GotDollar : State::Sync;
                }
                break;
            case State::GotM:
                if (b == '<' || b == '>') {
                    current_ = MspFrame{};
                    current_.direction =
                        b == '<' ? MspDirection::ToDrone : MspDirection::FromDrone;
                    state_ = State::Size;
                } else {
                    ++header_skips_;
                    state_ = b == '$' ? State::GotDollar : State::Sync;
                }
                break;
            case State::Size:
                expected_size_ = b;
                current_.payload.clear();
                current_.payload.reserve(b);
                state_ = State::Id;
                break;
            case State::Id:
                current_.command_id = b;
                state_ = expected_size_ > 0 ? State::Payload : State::Checksum;
                break;
            case State::Payload:
                current_.payload.push_back(b);
                if (current_.payload.size() == expected_size_) {
                    state_ = State::Checksum;
                }
                break;
            case State::Checksum:
                if (msp_checksum(expected_size_, current_.command_id, current_.payload) == b) {
                    frames.push_back(current_);
                } else {
                    ++checksum_errors_;
                }
                state_ = State::Sync;
                break;
        }
    }
    return frames;
}

double total_latency(const LatencyBudget& budget) {
    return budget.frame_capture_ms + budget.marker_detection_ms
         + budget.drone_identification_ms + budget.pid_loop_ms + budget.msp_packet_ms
         + budget.communication_ms;
}

ChannelModel::ChannelModel(const Params& params) : params_(params), rng_(params.seed) {}

DeliveryEvent ChannelModel::send(const LatencyBudget& budget,
                                 const std::vector<uint8_t>& bytes, int drone_index,
                                 double t_now) {
    DeliveryEvent ev;
    ev.drone_index = drone_index;
    ev.bytes = bytes;

    if (params_.drop_probability > 0.0) {
        std::bernoulli_distribution drop(params_.drop_probability);
        if (drop(rng_)) {
            ev.dropped = true;
            ev.deliver_time = t_now;
            return ev;
        }
    }

    double jitter = 0.0;
    if (params_.jitter_std_ms > 0.0) {
        std::normal_distribution<double> dist(0.0, params_.jitter_std_ms);
        jitter = dist(rng_);
    }
    double t = t_now + (budget.command_path_ms() + jitter) * 1e-3;
    // Per-destination FIFO: a frame never overtakes an earlier one.
    auto it = last_delivery_.find(drone_index);
    if (it != last_delivery_.end() && t < it->second) {
        t = it->second;
    }
    last_delivery_[drone_index] = t;
    ev.deliver_time = t;

    auto pos = std::upper_bound(queue_.begin(), queue_.end(), ev,
                                [](const DeliveryEvent& a, const DeliveryEvent& b) {
                                    return a.deliver_time < b.deliver_time;
                                });
    queue_.insert(pos, ev);
    return ev;
}

std::vector<DeliveryEvent> ChannelModel::poll(double t) {
    std::vector<DeliveryEvent> due;
    while (!queue_.empty() && queue_.front().deliver_time <= t) {
        due.push_back(std::move(queue_.front()));
        queue_.pop_front();
    }
    return due;
}

std::optional<double> ChannelModel::next_delivery_time() const {
    if (queue_.empty()) {
        return std::nullopt;
    }
    return queue_.front().deliver_time;
}

}  // namespace navsim
