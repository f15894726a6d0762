#include "bodyctl/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "bodyctl/error.hpp"

namespace bodyctl {

using nlohmann::json;

namespace {

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

std::string telemetry_json(const Telemetry& t)
{
    json points = json::object();
    for (std::size_t i = 0; i < kKeypointCount; ++i) {
        const auto& p = t.points[i];
        json entry = {{"valid", p.valid}};
        if (p.position) {
            entry["u"] = p.position->u;
            entry["v"] = p.position->v;
        }
        points[std::string(kKeypointNames[i])] = std::move(entry);
    }
    json outputs = json::object();
    for (const auto& [id, value] : t.outputs) outputs[id] = number_or_null(value);
    json j = {
        {"t", t.t},
        {"strategy", std::string(to_string(t.strategy))},
        {"points", std::move(points)},
        {"outputs", std::move(outputs)},
        {"fps", t.fps},
        {"drops", {{"frames", t.transport.frames_dropped}, {"updates", t.transport.updates_dropped}}},
        {"rejected", t.frames_rejected},
        {"bad_records", t.transport.bad_records},
        {"send_errors", t.transport.send_errors},
        {"s_max", t.s_max},
        {"c_min", t.c_min},
        {"preset", t.preset},
        {"calibration", t.calibration},
    };
    return j.dump();
}

std::vector<Keypoint> calibration_points(const std::vector<MappingSpec>& mappings)
{
    std::vector<Keypoint> points;
    for (const auto& m : mappings) {
        if (m.source.feature == FeatureKind::speed) points.push_back(m.source.point);
    }
    if (points.empty()) {
        points = {Keypoint::left_wrist, Keypoint::right_wrist, Keypoint::left_ankle, Keypoint::right_ankle};
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

Pipeline::Pipeline(EngineConfig cfg)
    : config_(std::move(cfg)),
      mappings_(&config_.mappings),
      kinematics_(config_.smoother, config_.all_pairs()),
      refs_(config_.strategy.tau_ref),
      change_filter_(config_.only_on_change.epsilon),
      last_values_(config_.mappings.size())
{
    config_.validate();
}

std::vector<ParamUpdate> Pipeline::process(const PoseFrame& frame)
{
    const KinematicFeatures* features = nullptr;
    try {
        features = &kinematics_.push(frame);
    } catch (const TimestampError&) {
        ++rejected_;
        throw;
    }
    const BodyRefs& refs = refs_.push(*features);
    const std::optional<BodyRefs> refs_opt = refs;
    const RouteInput in{*features, refs_opt, config_.strategy, config_.calibration};

    std::vector<ParamUpdate> updates;
    updates.reserve(mappings_->size());
    for (std::size_t i = 0; i < mappings_->size(); ++i) {
        const auto& spec = (*mappings_)[i];
        auto value = evaluate(spec, in);
        if (!value) value = spec.send_on_invalid;
        last_values_[i] = value;
        if (value) updates.push_back({frame.t, spec.out_address, *value});
    }

    if (frame.size() > 0) recent_t_.push_back(frame.t);
    while (!recent_t_.empty() && recent_t_.front() <= frame.t - 1000.0) recent_t_.pop_front();

    if (cal_state_ == CalState::sampling) sample_calibration(*features);

    if (config_.only_on_change.enabled) return change_filter_.filter(std::move(updates));
    return updates;
}

Telemetry Pipeline::telemetry(const TransportCounters& transport) const
{
    Telemetry t;
    t.t = kinematics_.last_t().value_or(0.0);
    t.strategy = config_.strategy.kind;
    const auto& f = kinematics_.current();
    const auto& refs = refs_.current();
    static const BodyRefs no_refs{};
    const auto strategy = config_.strategy.resolve();
    for (std::size_t i = 0; i < kKeypointCount; ++i) {
        auto& p = t.points[i];
        p.valid = f.points[i].valid;
        if (p.valid) p.position = normalize(keypoint_at(i), f.points[i].position, refs ? *refs : no_refs, strategy);
    }
    for (std::size_t i = 0; i < mappings_->size(); ++i) t.outputs.emplace_back((*mappings_)[i].id, last_values_[i]);
    // frames received during the last second
    t.fps = static_cast<double>(recent_t_.size());
    t.frames_rejected = rejected_;
    t.transport = transport;
    t.s_max = config_.calibration.s_max;
    t.c_min = config_.smoother.c_min;
    t.preset = preset_;
    switch (cal_state_) {
    case CalState::idle: t.calibration = "idle"; break;
    case CalState::sampling: t.calibration = "sampling"; break;
    case CalState::done: t.calibration = "done"; break;
    case CalState::failed: t.calibration = "failed"; break;
    }
    return t;
}

void Pipeline::set_confidence_threshold(double c_min)
{
    SmootherConfig s = config_.smoother;
    s.c_min = c_min;
    s.validate();
    config_.smoother = s;
    kinematics_.set_config(s);
}

void Pipeline::select_preset(const std::string& name)
{
    if (name == "default") {
        mappings_ = &config_.mappings;
    } else {
        const auto it = config_.presets.find(name);
        if (it == config_.presets.end()) throw Error("unknown preset '" + name + "'");
        mappings_ = &it->second;
    }
    preset_ = name;
    last_values_.assign(mappings_->size(), std::nullopt);
    change_filter_ = ChangeFilter(config_.only_on_change.epsilon);
}

void Pipeline::start_calibration(double duration_ms)
{
    if (!(duration_ms > 0.0)) throw Error("calibration duration must be > 0");
    cal_state_ = CalState::sampling;
    cal_duration_ = duration_ms;
    cal_start_t_.reset();
    cal_samples_.clear();
}

void Pipeline::sample_calibration(const KinematicFeatures& f)
{
    if (!cal_start_t_) {
        cal_start_t_ = f.t;
        cal_end_t_ = f.t + cal_duration_;
    }
    const auto points = calibration_points(*mappings_);
    if (const auto& refs = refs_.current()) {
        for (const auto k : points) {
            const auto& p = f.at(k);
            if (!p.valid) continue;
            if (const auto s = body_speed(p.speed, *refs)) cal_samples_.push_back(*s);
        }
    }
    if (f.t < cal_end_t_) return;

    const double p = config_.calibration.method == SpeedCalibration::Method::percentile
                         ? config_.calibration.percentile
                         : 95.0;
    json ev = {{"event", "calibration"}, {"samples", cal_samples_.size()}};
    try {
        const SpeedCalibration cal = calibrate(cal_samples_, p);
        config_.calibration.s_max = cal.s_max;
        cal_state_ = CalState::done;
        ev["ok"] = true;
        ev["s_max"] = cal.s_max;
    } catch (const Error& e) {
        cal_state_ = CalState::failed;
        ev["ok"] = false;
        ev["error"] = e.what();
    }
    event_ = ev.dump();
}

std::optional<std::string> Pipeline::take_event()
{
    auto e = std::move(event_);
    event_.reset();
    return e;
}

std::string Pipeline::handle_control(std::string_view text)
{
    json ack = {{"ack", nullptr}, {"ok", false}};
    try {
        const json j = json::parse(text.begin(), text.end());
        if (!j.is_object() || !j.contains("cmd") || !j["cmd"].is_string()) throw Error("control record needs \"cmd\"");
        const auto cmd = j["cmd"].get<std::string>();
        ack["ack"] = cmd;
        if (cmd == "set_strategy") {
            const auto name = j.value("strategy", std::string{});
            const auto k = strategy_from_name(name);
            if (!k) throw Error("unknown strategy '" + name + "'");
            set_strategy(*k);
            ack["strategy"] = std::string(to_string(*k));
        } else if (cmd == "select_preset") {
            const auto name = j.value("preset", std::string{});
            select_preset(name);
            ack["preset"] = name;
        } else if (cmd == "set_threshold") {
            if (!j.contains("value") || !j["value"].is_number()) throw Error("set_threshold needs a numeric value");
            try {
                set_confidence_threshold(j["value"].get<double>());
            } catch (const ConfigError& e) {
                throw Error(e.what());
            }
            ack["value"] = config_.smoother.c_min;
        } else if (cmd == "start_calibration") {
            const double duration = j.value("duration_ms", 10000.0);
            start_calibration(duration);
            ack["duration_ms"] = duration;
        } else {
            throw Error("unknown command '" + cmd + "'");
        }
        ack["ok"] = true;
    } catch (const json::exception& e) {
        ack["error"] = std::string("malformed control record: ") + e.what();
    } catch (const Error& e) {
        ack["error"] = e.what();
    }
    return ack.dump();
}

} // namespace bodyctl
