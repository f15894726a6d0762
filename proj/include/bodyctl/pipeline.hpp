#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bodyctl/body_frame.hpp"
#include "bodyctl/config.hpp"
#include "bodyctl/kinematics.hpp"
#include "bodyctl/pose_wire.hpp"
#include "bodyctl/router.hpp"

namespace bodyctl {

struct PointStatus
{
    bool valid = false;
    std::optional<NormalizedPosition> position; // under the active strategy
};

/// Counters owned by the transport layer; the pipeline only copies them into snapshots.
struct TransportCounters
{
    std::uint64_t frames_dropped = 0;  // ingest queue overflow
    std::uint64_t bad_records = 0;     // unparsable wire records
    std::uint64_t updates_dropped = 0; // sender queue overflow
    std::uint64_t send_errors = 0;
};

struct Telemetry
{
    double t = 0.0;
    StrategyKind strategy = StrategyKind::body_scaled;
    std::array<PointStatus, kKeypointCount> points{};
    std::vector<std::pair<std::string, std::optional<double>>> outputs; // mapping id -> value
    double fps = 0.0;
    std::uint64_t frames_rejected = 0; // timestamp regressions
    TransportCounters transport;
    double s_max = 0.0;
    double c_min = 0.0;
    std::string preset;
    std::string calibration; // idle | sampling | done | failed
};

/// {"t":..,"strategy":..,"points":{..},"outputs":{..},"fps":..,...}
std::string telemetry_json(const Telemetry& t);

/// Keypoints sampled for speed calibration: sources of speed mappings, else wrists and ankles.
std::vector<Keypoint> calibration_points(const std::vector<MappingSpec>& mappings);

/// parse -> smooth -> features -> refs -> normalize -> map -> route, strictly in frame order.
class Pipeline
{
public:
    explicit Pipeline(EngineConfig cfg);

    /// Throws TimestampError when frame.t does not advance; the state is left untouched.
    std::vector<ParamUpdate> process(const PoseFrame& frame);

    /// Advances time without observations, so validity decays while no frames arrive.
    std::vector<ParamUpdate> tick(double t) { return process(PoseFrame(t)); }

    std::optional<double> last_t() const { return kinematics_.last_t(); }

    Telemetry telemetry(const TransportCounters& transport = {}) const;

    /// Handles one {"cmd": ...} record and returns the acknowledgement record.
    std::string handle_control(std::string_view text);

    /// Calibration completion/failure record, produced once when sampling ends.
    std::optional<std::string> take_event();

    void set_strategy(StrategyKind k) { config_.strategy.kind = k; }
    void set_confidence_threshold(double c_min);
    /// Throws Error for an unknown preset.
    void select_preset(const std::string& name);
    void start_calibration(double duration_ms = 10000.0);

    const EngineConfig& config() const { return config_; }
    const std::vector<MappingSpec>& active_mappings() const { return *mappings_; }

private:
    void sample_calibration(const KinematicFeatures& f);

    EngineConfig config_;
    const std::vector<MappingSpec>* mappings_;
    std::string preset_ = "default";
    KinematicsTracker kinematics_;
    RefsTracker refs_;
    ChangeFilter change_filter_;
    std::vector<std::optional<double>> last_values_;
    std::deque<double> recent_t_;
    std::uint64_t rejected_ = 0;

    enum class CalState { idle, sampling, done, failed };
    CalState cal_state_ = CalState::idle;
    double cal_end_t_ = 0.0;
    std::optional<double> cal_start_t_;
    double cal_duration_ = 0.0;
    std::vector<double> cal_samples_;
    std::optional<std::string> event_;
};

} // namespace bodyctl
