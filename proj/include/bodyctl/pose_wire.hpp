#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bodyctl/keypoints.hpp"

namespace bodyctl {

struct RawKeypoint
{
    Keypoint name = Keypoint::nose;
    double x = 0.0;          // 0 = image left
    double y = 0.0;          // 0 = image top
    double confidence = 0.0;

    Vec2 position() const { return {x, y}; }
    friend bool operator==(const RawKeypoint&, const RawKeypoint&) = default;
};

/// One pose-estimator output. At most one keypoint per name, stored in canonical slot order.
class PoseFrame
{
public:
    PoseFrame() = default;
    explicit PoseFrame(double t_ms) : t(t_ms) {}

    double t = 0.0; // milliseconds

    /// Throws ParseError when the name is already present.
    void add(const RawKeypoint& kp);
    void set(const RawKeypoint& kp) { slots_[index_of(kp.name)] = kp; }
    void erase(Keypoint k) { slots_[index_of(k)].reset(); }

    const std::optional<RawKeypoint>& get(Keypoint k) const { return slots_[index_of(k)]; }
    bool has(Keypoint k) const { return slots_[index_of(k)].has_value(); }
    std::size_t size() const;
    bool empty() const { return size() == 0; }

    /// Present keypoints in canonical order.
    std::vector<RawKeypoint> keypoints() const;

    friend bool operator==(const PoseFrame&, const PoseFrame&) = default;

private:
    std::array<std::optional<RawKeypoint>, kKeypointCount> slots_{};
};

/// Parses one record: {"t": <ms>, "kp": {"<name>": [x, y, c], ...}}.
PoseFrame parse_frame(std::string_view text);

/// Canonical record: names in keypoint order, shortest round-trip numbers, no whitespace.
std::string serialize_frame(const PoseFrame& frame);

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

struct RecordResult
{
    std::size_t written = 0;
    std::size_t regressions = 0;
};

/// Appends canonical records, one per line, rejecting timestamp regressions.
class SessionRecorder
{
public:
    explicit SessionRecorder(std::ostream& sink) : sink_(sink) {}

    /// Returns false when the frame was rejected as a timestamp regression.
    /// Throws Error when the sink fails.
    bool write(const PoseFrame& frame);

    const RecordResult& result() const { return result_; }

private:
    std::ostream& sink_;
    std::optional<double> last_t_;
    RecordResult result_;
};

RecordResult record_session(const std::vector<PoseFrame>& frames, std::ostream& sink);

enum class ReplayMode { realtime, fast };

/// Emits frames in file order. Realtime mode sleeps to honor timestamp deltas.
/// Throws ParseError naming the line of the first unparsable record; frames before it
/// have already been delivered. Blank lines are skipped.
std::size_t replay_session(std::istream& source, ReplayMode mode,
                           const std::function<void(const PoseFrame&)>& emit);

/// Reads a whole session up front; nothing is returned if any line is bad.
std::vector<PoseFrame> read_session(std::istream& source);

} // namespace bodyctl
