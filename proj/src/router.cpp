#include "bodyctl/router.hpp"

#include <algorithm>
#include <cmath>

#include "bodyctl/error.hpp"
#include "bodyctl/pose_wire.hpp"

namespace bodyctl {

std::string_view to_string(FeatureKind f)
{
    switch (f) {
    case FeatureKind::speed: return "speed";
    case FeatureKind::pos_u: return "pos_u";
    case FeatureKind::pos_v: return "pos_v";
    case FeatureKind::rel_speed: return "rel_speed";
    }
    return "?";
}

std::optional<FeatureKind> feature_from_name(std::string_view name)
{
    for (auto f : {FeatureKind::speed, FeatureKind::pos_u, FeatureKind::pos_v, FeatureKind::rel_speed}) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

std::optional<double> MappingSpec::default_send_on_invalid(const MappingFn& fn, double lo)
{
    if (is_pitch(fn)) return std::nullopt;
    return lo;
}

namespace {

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

} // namespace

void MappingSpec::validate(const std::string& path) const
{
    if (id.empty()) throw ConfigError(path + ".id", "must not be empty");
    const std::string at = path + " (" + id + ")";
    if (!is_valid_osc_address(out_address))
        throw ConfigError(at + ".out_address", "bad OSC address '" + out_address + "'");
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
        throw ConfigError(at + ".out_range", "requires lo < hi, got [" + format_number(lo) + ", " +
                                                 format_number(hi) + "]");
    if (source.feature == FeatureKind::rel_speed) {
        if (!source.partner) throw ConfigError(at + ".source.pair", "rel_speed needs a partner keypoint");
        if (*source.partner == source.point)
            throw ConfigError(at + ".source.pair", "partner must differ from the point");
    } else if (source.partner) {
        throw ConfigError(at + ".source.pair", "only rel_speed takes a partner keypoint");
    }
    bodyctl::validate(function, at + ".function");
    if (const auto* p = std::get_if<PitchExp>(&function)) {
        const double top = p->f0 * std::exp2(p->octaves);
        if (!close_rel(lo, p->f0) || !close_rel(hi, top)) {
            throw ConfigError(at + ".out_range", "pitch mappings must declare [f0, f0*2^octaves] = [" +
                                                     format_number(p->f0) + ", " + format_number(top) + "]");
        }
    }
    if (send_on_invalid && !(*send_on_invalid >= lo && *send_on_invalid <= hi))
        throw ConfigError(at + ".send_on_invalid", "must lie within out_range");
}

Bytes encode_osc(const ParamUpdate& update) { return encode_osc(update.address, static_cast<float>(update.value)); }

std::optional<double> source_value(const MappingSpec& spec, const RouteInput& in)
{
    const StrategyKind kind = spec.strategy.value_or(in.strategy.kind);
    const auto& point = in.features.at(spec.source.point);
    static const BodyRefs no_refs{};
    const BodyRefs& refs = in.refs ? *in.refs : no_refs;

    auto speed_to_unit = [&](double s_abs) -> std::optional<double> {
        // camera-centred mappings have no body scale; speed stays in image units per second
        if (kind == StrategyKind::camera_center) return normalize_speed(s_abs, in.calibration);
        const auto s_bl = body_speed(s_abs, refs);
        if (!s_bl) return std::nullopt;
        return normalize_speed(*s_bl, in.calibration);
    };

    switch (spec.source.feature) {
    case FeatureKind::speed:
        if (!point.valid) return std::nullopt;
        return speed_to_unit(point.speed);
    case FeatureKind::rel_speed: {
        const auto rel = in.features.relative_velocity(spec.source.point, *spec.source.partner);
        if (!rel || !rel->valid) return std::nullopt;
        return speed_to_unit(norm(rel->velocity));
    }
    case FeatureKind::pos_u:
    case FeatureKind::pos_v: {
        if (!point.valid) return std::nullopt;
        const auto pos = normalize(spec.source.point, point.position, refs, in.strategy.resolve(kind));
        if (!pos) return std::nullopt;
        return spec.source.feature == FeatureKind::pos_u ? pos->u : pos->v;
    }
    }
    return std::nullopt;
}

std::optional<double> evaluate(const MappingSpec& spec, const RouteInput& in)
{
    const auto s = source_value(spec, in);
    if (!s) return std::nullopt;
    const double m = apply(spec.function, *s);
    const double value = is_pitch(spec.function) ? m : spec.lo + m * (spec.hi - spec.lo);
    return std::clamp(value, spec.lo, spec.hi);
}

std::vector<ParamUpdate> route(const RouteInput& in, const std::vector<MappingSpec>& specs)
{
    std::vector<ParamUpdate> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        auto value = evaluate(spec, in);
        if (!value) value = spec.send_on_invalid;
        if (value) out.push_back({in.features.t, spec.out_address, *value});
    }
    return out;
}

std::vector<ParamUpdate> ChangeFilter::filter(std::vector<ParamUpdate> updates)
{
    std::vector<ParamUpdate> kept;
    kept.reserve(updates.size());
    for (auto& u : updates) {
        auto it = last_.find(u.address);
        if (it != last_.end() && std::abs(u.value - it->second) < epsilon_) continue;
        last_[u.address] = u.value;
        kept.push_back(std::move(u));
    }
    return kept;
}

} // namespace bodyctl
