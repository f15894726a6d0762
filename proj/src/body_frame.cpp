#include "bodyctl/body_frame.hpp"

#include <algorithm>
#include <cmath>

#include "bodyctl/error.hpp"

namespace bodyctl {

std::string_view to_string(StrategyKind k)
{
    switch (k) {
    case StrategyKind::camera_center: return "camera_center";
    case StrategyKind::shoulder_anchor: return "shoulder_anchor";
    case StrategyKind::body_scaled: return "body_scaled";
    }
    return "?";
}

std::optional<StrategyKind> strategy_from_name(std::string_view name)
{
    for (auto k : {StrategyKind::camera_center, StrategyKind::shoulder_anchor, StrategyKind::body_scaled}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

ReferenceStrategy StrategyParams::resolve(StrategyKind k) const
{
    switch (k) {
    case StrategyKind::camera_center: return CameraCenter{};
    case StrategyKind::shoulder_anchor: return shoulder_anchor;
    case StrategyKind::body_scaled: return body_scaled;
    }
    return body_scaled;
}

void StrategyParams::validate() const
{
    auto positive = [](double v, const char* path) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path, "must be > 0");
    };
    positive(shoulder_anchor.arm_length, "strategy.arm_length");
    positive(body_scaled.out_mult, "strategy.out_mult");
    positive(body_scaled.in_mult, "strategy.in_mult");
    positive(body_scaled.v_up_mult, "strategy.v_up_mult");
    positive(body_scaled.v_down_mult, "strategy.v_down_mult");
    if (!(tau_ref >= 0.0) || !std::isfinite(tau_ref)) throw ConfigError("strategy.tau_ref", "must be >= 0");
}

namespace {

double smooth(double raw, double prev, double dt_ms, double tau_ms)
{
    if (tau_ms <= 0.0 || dt_ms <= 0.0) return raw;
    const double alpha = 1.0 - std::exp(-dt_ms / tau_ms);
    return alpha * raw + (1.0 - alpha) * prev;
}

SideRefs side_refs(const KinematicFeatures& f, Side s, const std::optional<BodyRefs>& prev, double tau_ref)
{
    SideRefs out;
    const auto& shoulder = f.at(shoulder_of(s));
    const auto& hip = f.at(hip_of(s));
    if (!shoulder.valid || !hip.valid) return out;
    out.shoulder = shoulder.position;
    out.hip = hip.position;
    const double raw = distance(shoulder.position, hip.position);
    if (raw < kDegenerateDistance) return out;
    const bool has_prev = prev && prev->side(s).valid;
    out.d_sh = has_prev ? smooth(raw, prev->side(s).d_sh, f.t - prev->t, tau_ref) : raw;
    out.valid = true;
    return out;
}

// Divides by a reference distance and applies the orientation sign.
double offset(double from, double to, double scale, double sign) { return sign * (to - from) / scale; }

NormalizedPosition place(double raw_u, double raw_v, double in, double out, double down, double up)
{
    NormalizedPosition p;
    p.raw_u = raw_u;
    p.raw_v = raw_v;
    p.u = (std::clamp(raw_u, -in, out) + in) / (in + out);
    p.v = (std::clamp(raw_v, -down, up) + down) / (down + up);
    // guards against the last-ulp overshoot of the affine map
    p.u = std::clamp(p.u, 0.0, 1.0);
    p.v = std::clamp(p.v, 0.0, 1.0);
    return p;
}

// Outward is +x for the right side when the performer's right shoulder is at larger x.
double outward_sign(Side side, const BodyRefs& refs) { return side == Side::right ? refs.sgn : -refs.sgn; }

} // namespace

BodyRefs compute_refs(const KinematicFeatures& f, const std::optional<BodyRefs>& prev, double tau_ref)
{
    BodyRefs refs;
    refs.t = f.t;
    const auto& ls = f.at(Keypoint::left_shoulder);
    const auto& rs = f.at(Keypoint::right_shoulder);
    if (ls.valid && rs.valid) {
        refs.left_shoulder = ls.position;
        refs.right_shoulder = rs.position;
        refs.sgn = (rs.position.x - ls.position.x) < 0.0 ? -1 : 1;
        const double raw = distance(rs.position, ls.position);
        if (raw >= kDegenerateDistance) {
            refs.d_ss = (prev && prev->valid) ? smooth(raw, prev->d_ss, f.t - prev->t, tau_ref) : raw;
            refs.valid = true;
        }
    }
    refs.left = side_refs(f, Side::left, prev, tau_ref);
    refs.right = side_refs(f, Side::right, prev, tau_ref);
    return refs;
}

std::optional<NormalizedPosition> normalize_body_scaled(Vec2 point, Side side, const BodyRefs& refs,
                                                        const BodyScaled& strat, Limb limb)
{
    const SideRefs& sr = refs.side(side);
    if (!refs.valid || !sr.valid) return std::nullopt;
    const double sign = outward_sign(side, refs);
    double raw_u = 0.0;
    double raw_v = 0.0;
    if (limb == Limb::arm) {
        raw_u = offset(sr.shoulder.x, point.x, refs.d_ss, sign);
        raw_v = offset(point.y, sr.shoulder.y, sr.d_sh, 1.0);
    } else {
        raw_u = offset(sr.hip.x, point.x, sr.d_sh, sign);
        raw_v = offset(point.y, sr.hip.y, sr.d_sh, 1.0);
    }
    return place(raw_u, raw_v, strat.in_mult, strat.out_mult, strat.v_down_mult, strat.v_up_mult);
}

std::optional<NormalizedPosition> normalize_shoulder_anchor(Vec2 point, Side side, const BodyRefs& refs,
                                                            const ShoulderAnchor& strat, Limb limb)
{
    if (!refs.valid) return std::nullopt;
    Vec2 anchor;
    if (limb == Limb::arm) {
        anchor = side == Side::right ? refs.right_shoulder : refs.left_shoulder;
    } else {
        const SideRefs& sr = refs.side(side);
        if (!sr.valid) return std::nullopt;
        anchor = sr.hip;
    }
    const double raw_u = offset(anchor.x, point.x, strat.arm_length, outward_sign(side, refs));
    const double raw_v = offset(point.y, anchor.y, strat.arm_length, 1.0);
    return place(raw_u, raw_v, 1.0, 1.0, 1.0, 1.0);
}

NormalizedPosition normalize_camera_center(Vec2 point)
{
    NormalizedPosition p;
    p.u = std::clamp(point.x, 0.0, 1.0);
    p.v = std::clamp(1.0 - point.y, 0.0, 1.0);
    p.raw_u = point.x;
    p.raw_v = 1.0 - point.y;
    return p;
}

std::optional<NormalizedPosition> normalize(Keypoint k, Vec2 point, const BodyRefs& refs,
                                            const ReferenceStrategy& strat)
{
    if (std::holds_alternative<CameraCenter>(strat)) return normalize_camera_center(point);
    const auto side = side_of(k);
    if (!side) return std::nullopt;
    const Limb limb = is_lower_body(k) ? Limb::leg : Limb::arm;
    if (const auto* anchor = std::get_if<ShoulderAnchor>(&strat))
        return normalize_shoulder_anchor(point, *side, refs, *anchor, limb);
    return normalize_body_scaled(point, *side, refs, std::get<BodyScaled>(strat), limb);
}

std::optional<double> body_speed(double s_abs, const BodyRefs& refs)
{
    if (!refs.valid) return std::nullopt;
    return s_abs / refs.d_ss;
}

const BodyRefs& RefsTracker::push(const KinematicFeatures& features)
{
    refs_ = compute_refs(features, refs_, tau_ref_);
    return *refs_;
}

} // namespace bodyctl
