#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bodyctl/body_frame.hpp"
#include "bodyctl/kinematics.hpp"
#include "bodyctl/mapping.hpp"
#include "bodyctl/osc.hpp"

namespace bodyctl {

enum class FeatureKind { speed, pos_u, pos_v, rel_speed };

std::string_view to_string(FeatureKind f);
std::optional<FeatureKind> feature_from_name(std::string_view name);

struct FeatureSource
{
    Keypoint point = Keypoint::right_wrist;
    FeatureKind feature = FeatureKind::speed;
    std::optional<Keypoint> partner; // rel_speed only
};

struct MappingSpec
{
    std::string id;
    FeatureSource source;
    std::optional<StrategyKind> strategy; // empty: the engine's active strategy
    MappingFn function = ExpDb{};
    std::string out_address;
    double lo = 0.0;
    double hi = 1.0;
    std::optional<double> send_on_invalid; // empty: emit nothing while the source is invalid

    /// Default invalid-source behaviour: lo for amplitude-like functions, nothing for pitch.
    static std::optional<double> default_send_on_invalid(const MappingFn& fn, double lo);

    /// Throws ConfigError rooted at `path`.
    void validate(const std::string& path) const;
};

struct ParamUpdate
{
    double t = 0.0; // ms
    std::string address;
    double value = 0.0;

    friend bool operator==(const ParamUpdate&, const ParamUpdate&) = default;
};

Bytes encode_osc(const ParamUpdate& update);

/// Everything a mapping can read on one frame.
struct RouteInput
{
    const KinematicFeatures& features;
    const std::optional<BodyRefs>& refs;
    const StrategyParams& strategy;
    const SpeedCalibration& calibration;
};

/// Raw value of a source feature before mapping: normalized speed or u/v in [0,1].
/// Empty when the source or the references it needs are invalid.
std::optional<double> source_value(const MappingSpec& spec, const RouteInput& in);

/// Mapped value rescaled into [lo, hi] (pitch in Hz, clamped). Empty when the source is invalid.
std::optional<double> evaluate(const MappingSpec& spec, const RouteInput& in);

/// One update per spec in spec order; invalid sources emit send_on_invalid or nothing.
std::vector<ParamUpdate> route(const RouteInput& in, const std::vector<MappingSpec>& specs);

/// Suppresses updates that moved less than epsilon since the last one sent on that address.
class ChangeFilter
{
public:
    explicit ChangeFilter(double epsilon = 1e-4) : epsilon_(epsilon) {}

    std::vector<ParamUpdate> filter(std::vector<ParamUpdate> updates);

private:
    double epsilon_;
    std::map<std::string, double, std::less<>> last_;
};

} // namespace bodyctl
