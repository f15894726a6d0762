#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "bodyctl/keypoints.hpp"
#include "bodyctl/kinematics.hpp"

namespace bodyctl {

// Design 1: the view's center is the reference.
struct CameraCenter
{
};

// Design 2: same-side shoulder (hip for legs) anchor with a fixed reach.
struct ShoulderAnchor
{
    double arm_length = 0.25; // normalized image units
};

// Design 3: offsets measured in shoulder-width / torso-length units.
struct BodyScaled
{
    double out_mult = 2.0;
    double in_mult = 1.5;
    double v_up_mult = 1.5;
    double v_down_mult = 1.5;
};

using ReferenceStrategy = std::variant<CameraCenter, ShoulderAnchor, BodyScaled>;

enum class StrategyKind { camera_center, shoulder_anchor, body_scaled };

std::string_view to_string(StrategyKind k);
std::optional<StrategyKind> strategy_from_name(std::string_view name);

/// Parameters for every strategy plus the active selection; switching strategies keeps them.
struct StrategyParams
{
    StrategyKind kind = StrategyKind::body_scaled;
    ShoulderAnchor shoulder_anchor;
    BodyScaled body_scaled;
    double tau_ref = 500.0; // ms, smoothing of reference distances

    ReferenceStrategy resolve(StrategyKind k) const;
    ReferenceStrategy resolve() const { return resolve(kind); }
    void validate() const;
};

struct SideRefs
{
    bool valid = false;
    double d_sh = 0.0; // same-side shoulder-to-hip distance, smoothed
    Vec2 shoulder;
    Vec2 hip;
};

struct BodyRefs
{
    double t = 0.0;
    bool valid = false; // shoulder line usable: d_ss above the degenerate threshold
    double d_ss = 0.0;  // shoulder-to-shoulder distance, smoothed
    Vec2 left_shoulder;
    Vec2 right_shoulder;
    int sgn = 1; // sign(x_right_shoulder - x_left_shoulder)
    SideRefs left;
    SideRefs right;

    const SideRefs& side(Side s) const { return s == Side::left ? left : right; }
};

inline constexpr double kDegenerateDistance = 1e-6;

BodyRefs compute_refs(const KinematicFeatures& features, const std::optional<BodyRefs>& prev, double tau_ref);

struct NormalizedPosition
{
    double u = 0.0;
    double v = 0.0;
    double raw_u = 0.0; // unclamped
    double raw_v = 0.0;
};

enum class Limb { arm, leg };

/// Arms anchor at the same-side shoulder (d_ss across, d_sh vertically); legs anchor at the
/// same-side hip and use d_sh on both axes. Empty when the needed references are invalid.
std::optional<NormalizedPosition> normalize_body_scaled(Vec2 point, Side side, const BodyRefs& refs,
                                                        const BodyScaled& strat, Limb limb = Limb::arm);

std::optional<NormalizedPosition> normalize_shoulder_anchor(Vec2 point, Side side, const BodyRefs& refs,
                                                            const ShoulderAnchor& strat, Limb limb = Limb::arm);

NormalizedPosition normalize_camera_center(Vec2 point);

/// Dispatches on the strategy and on the keypoint's side and limb. Empty for nose under the
/// body-relative strategies or when references are invalid.
std::optional<NormalizedPosition> normalize(Keypoint k, Vec2 point, const BodyRefs& refs,
                                            const ReferenceStrategy& strat);

/// Speed in body lengths (shoulder widths) per second.
std::optional<double> body_speed(double s_abs, const BodyRefs& refs);

/// Smoothed reference state for one stream.
class RefsTracker
{
public:
    explicit RefsTracker(double tau_ref = 500.0) : tau_ref_(tau_ref) {}

    const BodyRefs& push(const KinematicFeatures& features);
    const std::optional<BodyRefs>& current() const { return refs_; }

private:
    double tau_ref_;
    std::optional<BodyRefs> refs_;
};

} // namespace bodyctl
