#include "bodyctl/kinematics.hpp"

#include <cmath>
#include <string>

#include "bodyctl/error.hpp"

namespace bodyctl {

void SmootherConfig::validate() const
{
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("smoother.tau", "must be >= 0");
    if (!(c_min >= 0.0 && c_min <= 1.0)) throw ConfigError("smoother.c_min", "must be within [0,1]");
    if (!(t_hold >= 0.0) || !std::isfinite(t_hold)) throw ConfigError("smoother.t_hold", "must be >= 0");
}

namespace {

// Fraction of the previous value that survives dt milliseconds.
double retention(double dt_ms, double tau_ms)
{
    if (tau_ms <= 0.0) return 0.0;
    return std::exp(-dt_ms / tau_ms);
}

} // namespace

PointState update(const PointState& state, const std::optional<RawKeypoint>& obs, double t,
                  const SmootherConfig& cfg)
{
    if (state.last_update_t && !(t > *state.last_update_t)) {
        throw TimestampError("non-increasing timestamp: " + format_number(t) + " after " +
                             format_number(*state.last_update_t));
    }
    PointState next = state;
    next.last_update_t = t;
    const bool observed = obs && obs->confidence >= cfg.c_min;

    if (observed && !state.valid) {
        next.p_hat = obs->position();
        next.v = {};
        next.last_seen_t = t;
        next.valid = true;
        return next;
    }
    if (!state.valid) return next;

    const double dt = t - *state.last_update_t;
    const double keep = retention(dt, cfg.tau);
    if (observed) {
        next.p_hat = (1.0 - keep) * obs->position() + keep * state.p_hat;
        next.v = (1000.0 / dt) * (next.p_hat - state.p_hat);
        next.last_seen_t = t;
    } else {
        next.v = keep * state.v;
        if (t - state.last_seen_t > cfg.t_hold) {
            next.valid = false;
            next.v = {};
        }
    }
    return next;
}

std::optional<RelativeVelocity> KinematicFeatures::relative_velocity(Keypoint a, Keypoint b) const
{
    for (const auto& r : relative) {
        if (r.pair.first == a && r.pair.second == b) return r;
        if (r.pair.first == b && r.pair.second == a) return RelativeVelocity{{a, b}, {-r.velocity.x, -r.velocity.y}, r.valid};
    }
    return std::nullopt;
}

KinematicFeatures features(const std::array<PointState, kKeypointCount>& states,
                           const std::vector<PointPair>& pairs, double t)
{
    KinematicFeatures out;
    out.t = t;
    for (std::size_t i = 0; i < kKeypointCount; ++i) {
        const auto& s = states[i];
        auto& f = out.points[i];
        f.valid = s.valid;
        f.position = s.p_hat;
        f.velocity = s.valid ? s.v : Vec2{};
        f.speed = norm(f.velocity);
    }
    out.relative.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        const auto& fa = out.at(a);
        const auto& fb = out.at(b);
        out.relative.push_back({{a, b}, fa.velocity - fb.velocity, fa.valid && fb.valid});
    }
    return out;
}

std::vector<PointPair> default_pairs()
{
    return {{Keypoint::left_wrist, Keypoint::right_wrist}, {Keypoint::left_ankle, Keypoint::right_ankle}};
}

KinematicsTracker::KinematicsTracker(SmootherConfig cfg, std::vector<PointPair> pairs)
    : cfg_(cfg), pairs_(std::move(pairs))
{
    cfg_.validate();
    current_ = features(states_, pairs_);
}

const KinematicFeatures& KinematicsTracker::push(const PoseFrame& frame)
{
    if (last_t_ && !(frame.t > *last_t_)) {
        throw TimestampError("non-increasing timestamp: " + format_number(frame.t) + " after " +
                             format_number(*last_t_));
    }
    for (std::size_t i = 0; i < kKeypointCount; ++i) {
        states_[i] = update(states_[i], frame.get(keypoint_at(i)), frame.t, cfg_);
    }
    last_t_ = frame.t;
    current_ = features(states_, pairs_, frame.t);
    return current_;
}

} // namespace bodyctl
