#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "bodyctl/keypoints.hpp"
#include "bodyctl/pose_wire.hpp"

namespace bodyctl {

struct SmootherConfig
{
    double tau = 80.0;    // ms; 0 disables smoothing (alpha = 1)
    double c_min = 0.3;
    double t_hold = 300.0; // ms

    /// Throws ConfigError on tau < 0, c_min outside [0,1] or t_hold < 0.
    void validate() const;
};

/// Per-keypoint smoother state. Positions in normalized image units, velocity in units per second.
struct PointState
{
    Vec2 p_hat;
    Vec2 v;
    double last_seen_t = 0.0;
    std::optional<double> last_update_t; // empty until the first update
    bool valid = false;
};

/// Advances one point to frame time t. `obs` is ignored when its confidence is below c_min.
/// Throws TimestampError when t does not exceed the previous update time.
PointState update(const PointState& state, const std::optional<RawKeypoint>& obs, double t,
                  const SmootherConfig& cfg);

using PointPair = std::pair<Keypoint, Keypoint>;

struct PointFeatures
{
    Vec2 position;
    Vec2 velocity;
    double speed = 0.0;
    bool valid = false;
};

struct RelativeVelocity
{
    PointPair pair;
    Vec2 velocity; // v_first - v_second
    bool valid = false;
};

struct KinematicFeatures
{
    double t = 0.0;
    std::array<PointFeatures, kKeypointCount> points{};
    std::vector<RelativeVelocity> relative;

    const PointFeatures& at(Keypoint k) const { return points[index_of(k)]; }
    PointFeatures& at(Keypoint k) { return points[index_of(k)]; }

    /// Relative velocity for (a, b), negating a stored (b, a) entry. Empty if the pair is not configured.
    std::optional<RelativeVelocity> relative_velocity(Keypoint a, Keypoint b) const;
};

KinematicFeatures features(const std::array<PointState, kKeypointCount>& states,
                           const std::vector<PointPair>& pairs, double t = 0.0);

/// Wrist-wrist and ankle-ankle.
std::vector<PointPair> default_pairs();

/// Smoother state for all 17 keypoints of one performer stream.
class KinematicsTracker
{
public:
    explicit KinematicsTracker(SmootherConfig cfg = {}, std::vector<PointPair> pairs = default_pairs());

    /// Throws TimestampError when frame.t does not advance.
    const KinematicFeatures& push(const PoseFrame& frame);

    const KinematicFeatures& current() const { return current_; }
    const PointState& state(Keypoint k) const { return states_[index_of(k)]; }
    std::optional<double> last_t() const { return last_t_; }

    void set_config(const SmootherConfig& cfg) { cfg_ = cfg; }
    const SmootherConfig& config() const { return cfg_; }

private:
    SmootherConfig cfg_;
    std::vector<PointPair> pairs_;
    std::array<PointState, kKeypointCount> states_{};
    std::optional<double> last_t_;
    KinematicFeatures current_;
};

} // namespace bodyctl
