#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "navsim/errors.hpp"
#include "navsim/vehicle.hpp"

namespace navsim {

// MultiWii Serial Protocol v1 framing: '$' 'M' dir size id payload checksum,
// checksum = XOR(size, id, payload bytes). dir is '<' to the drone and '>'
// from it.
enum class MspDirection : uint8_t { ToDrone, FromDrone };

struct MspFrame {
    MspDirection direction = MspDirection::ToDrone;
    uint8_t command_id = 0;
    std::vector<uint8_t> payload;

    bool operator==(const MspFrame&) const = default;
};

// SET_RAW_RC-style message carrying the eight RC channels.
constexpr uint8_t kMspSetRawRc = 200;

uint8_t msp_checksum(uint8_t size, uint8_t id, const std::vector<uint8_t>& payload);

/// Serialize a raw frame. Throws PayloadTooLarge beyond 255 bytes.
std::vector<uint8_t> encode(const MspFrame& frame);

/// Serialize a command message as id 200 with 8 little-endian u16 channels
/// (roll, pitch, yaw, throttle, aux1..aux4). droneIndex addresses the channel
/// model and is not part of the payload. Throws ChannelOutOfRange if any
/// channel is outside [1000, 2000].
std::vector<uint8_t> encode(const CommandMessage& cmd);

/// Parse channels back out of a SET_RAW_RC frame.
CommandMessage decode_command(const MspFrame& frame, int drone_index);

/// Strict one-shot decode of exactly one frame. Throws BadHeader or
/// ChecksumMismatch.
MspFrame decode_frame(const std::vector<uint8_t>& bytes);

/// Incremental decoder for byte streams. Partial frames are buffered;
/// corrupt frames are dropped and counted while the stream resynchronizes on
/// the next '$'.
class FrameDecoder {
public:
    std::vector<MspFrame> feed(const uint8_t* data, size_t len);
    std::vector<MspFrame> feed(const std::vector<uint8_t>& bytes) {
        return feed(bytes.data(), bytes.size());
    }

    uint64_t checksum_errors() const { return checksum_errors_; }
    uint64_t header_skips() const { return header_skips_; }

private:
    enum class State { Sync, GotDollar, GotM, Size, Id, Payload, Checksum };
    State state_ = State::Sync;
    MspFrame current_;
    uint8_t expected_size_ = 0;
    uint64_t checksum_errors_ = 0;
    uint64_t header_skips_ = 0;
};

/// Per-stage latency budget in milliseconds. Defaults follow the measured
/// multi-drone pipeline and sum to 341.33 ms.
struct LatencyBudget {
    double frame_capture_ms = 8.33;
    double marker_detection_ms = 12.0;
    double drone_identification_ms = 27.0;
    double pid_loop_ms = 100.0;
    double msp_packet_ms = 190.0;
    double communication_ms = 4.0;

    double perception_ms() const {
        return frame_capture_ms + marker_detection_ms + drone_identification_ms;
    }
    double command_path_ms() const { return msp_packet_ms + communication_ms; }
};

double total_latency(const LatencyBudget& budget);

struct DeliveryEvent {
    double deliver_time = 0.0;
    int drone_index = 0;
    std::vector<uint8_t> bytes;
    bool dropped = false;
};

/// Star-topology command channel: sender -> router -> drone. Jitter and drops
/// are seeded and reproducible; deliveries to one destination never reorder.
class ChannelModel {
public:
    struct Params {
        double jitter_std_ms = 0.0;
        double drop_probability = 0.0;
        uint64_t seed = 0;
    };

    ChannelModel() : ChannelModel(Params{}) {}
    explicit ChannelModel(const Params& params);

    /// Queue a frame for delivery at t_now + msp_packet + communication (+
    /// jitter). A dropped frame is returned with `dropped` set and is never
    /// delivered.
    DeliveryEvent send(const LatencyBudget& budget, const std::vector<uint8_t>& bytes,
                       int drone_index, double t_now);

    /// Deliveries due at or before `t`, in delivery order.
    std::vector<DeliveryEvent> poll(double t);

    bool empty() const { return queue_.empty(); }
    std::optional<double> next_delivery_time() const;

private:
    Params params_;
    std::mt19937_64 rng_;
    std::deque<DeliveryEvent> queue_;  // kept sorted by deliver_time
    std::map<int, double> last_delivery_;
};

}  // namespace navsim
