#pragma once

#include <stdexcept>
#include <string>

namespace navsim {

// Base class for all recoverable errors raised by the library. Scenario
// drivers catch these at the run boundary; everything else is a logic bug.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- geometry --
struct PointBehindCamera : Error {
    explicit PointBehindCamera(const std::string& msg) : Error(msg) {}
};
struct UndistortDiverged : Error {
    explicit UndistortDiverged(const std::string& msg) : Error(msg) {}
};
struct DegenerateSamples : Error {
    explicit DegenerateSamples(const std::string& msg) : Error(msg) {}
};
struct FitOutOfDomain : Error {
    explicit FitOutOfDomain(const std::string& msg) : Error(msg) {}
};

// -- marker --
struct ZeroRadius : Error {
    explicit ZeroRadius(const std::string& msg) : Error(msg) {}
};

// -- vehicle --
struct EmptyPath : Error {
    explicit EmptyPath(const std::string& msg) : Error(msg) {}
};

// -- control --
struct NonPositiveFps : Error {
    explicit NonPositiveFps(const std::string& msg) : Error(msg) {}
};
struct EmptyWaypointList : Error {
    explicit EmptyWaypointList(const std::string& msg) : Error(msg) {}
};
struct NoOscillation : Error {
    explicit NoOscillation(const std::string& msg) : Error(msg) {}
};
struct UnknownControllerType : Error {
    explicit UnknownControllerType(const std::string& msg) : Error(msg) {}
};
struct RangeExhausted : Error {
    explicit RangeExhausted(const std::string& msg) : Error(msg) {}
};

// -- msp --
struct PayloadTooLarge : Error {
    explicit PayloadTooLarge(const std::string& msg) : Error(msg) {}
};
struct ChannelOutOfRange : Error {
    explicit ChannelOutOfRange(const std::string& msg) : Error(msg) {}
};
struct ChecksumMismatch : Error {
    explicit ChecksumMismatch(const std::string& msg) : Error(msg) {}
};
struct BadHeader : Error {
    explicit BadHeader(const std::string& msg) : Error(msg) {}
};

// -- planning --
struct NoPathFound : Error {
    explicit NoPathFound(const std::string& msg) : Error(msg) {}
};
struct InvalidEndpoint : Error {
    explicit InvalidEndpoint(const std::string& msg) : Error(msg) {}
};
struct CollisionAfterResample : Error {
    explicit CollisionAfterResample(const std::string& msg) : Error(msg) {}
};
struct WrongDroneCount : Error {
    explicit WrongDroneCount(const std::string& msg) : Error(msg) {}
};

// -- harness --
struct ConfigError : Error {
    explicit ConfigError(const std::string& field_path, const std::string& msg)
        : Error(field_path + ": " + msg), field(field_path) {}
    std::string field;
};
struct ScenarioAborted : Error {
    explicit ScenarioAborted(const std::string& msg) : Error(msg) {}
};
struct EmptyLog : Error {
    explicit EmptyLog(const std::string& msg) : Error(msg) {}
};

}  // namespace navsim
