#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bodyctl/body_frame.hpp"
#include "bodyctl/config.hpp"
#include "bodyctl/error.hpp"
#include "bodyctl/kinematics.hpp"
#include "bodyctl/mapping.hpp"
#include "bodyctl/osc.hpp"
#include "bodyctl/pose_wire.hpp"
#include "bodyctl/replay.hpp"
#include "bodyctl/sinks.hpp"

namespace py = pybind11;
using namespace bodyctl;

namespace {

py::dict frame_to_dict(const PoseFrame& f)
{
    py::dict kp;
    for (const auto& k : f.keypoints()) kp[py::str(std::string(name_of(k.name)))] = py::make_tuple(k.x, k.y, k.confidence);
    py::dict d;
    d["t"] = f.t;
    d["kp"] = kp;
    return d;
}

PoseFrame frame_from_dict(const py::dict& d)
{
    PoseFrame f(d["t"].cast<double>());
    for (const auto& [key, value] : d["kp"].cast<py::dict>()) {
        const auto name = key.cast<std::string>();
        const auto k = keypoint_from_name(name);
        if (!k) throw ParseError("unknown keypoint name '" + name + "'");
        const auto xyc = value.cast<std::tuple<double, double, double>>();
        f.add({*k, std::get<0>(xyc), std::get<1>(xyc), std::get<2>(xyc)});
    }
    return f;
}

// Single-frame normalization: no smoothing history, so the frame is taken as-is.
py::dict normalize_frame(const std::string& record, const std::string& strategy, double arm_length)
{
    const PoseFrame frame = parse_frame(record);
    const auto kind = strategy_from_name(strategy);
    if (!kind) throw Error("unknown strategy '" + strategy + "'");
    StrategyParams params;
    params.kind = *kind;
    params.shoulder_anchor.arm_length = arm_length;
    params.validate();

    KinematicsTracker kin(SmootherConfig{0.0, 0.0, 300.0});
    const auto& f = kin.push(frame);
    const BodyRefs refs = compute_refs(f, std::nullopt, params.tau_ref);
    py::dict out;
    for (std::size_t i = 0; i < kKeypointCount; ++i) {
        const auto k = keypoint_at(i);
        if (!f.at(k).valid) continue;
        const auto p = normalize(k, f.at(k).position, refs, params.resolve());
        if (p) out[py::str(std::string(name_of(k)))] = py::make_tuple(p->u, p->v);
    }
    return out;
}

py::dict jnd(const std::string& function, const std::map<std::string, double>& params, double w_in, double l_jnd,
             std::size_t grid)
{
    const JndReport r = jnd_analyze(make_function(function, params), JndOptions{w_in, l_jnd, grid});
    py::list s, step, perceptible;
    for (const auto& p : r.points) {
        s.append(p.s);
        step.append(p.step_db);
        perceptible.append(p.perceptible);
    }
    py::dict d;
    d["s"] = s;
    d["step_db"] = step;
    d["perceptible"] = perceptible;
    d["excluded"] = r.excluded;
    d["uniformity_ratio"] = r.uniformity_ratio ? py::object(py::float_(*r.uniformity_ratio)) : py::none();
    return d;
}

py::dict replay_file(const std::string& config_path, const std::string& session_path, const std::string& sink)
{
    const EngineConfig cfg = load_config(config_path);
    std::ifstream in(session_path);
    if (!in) throw Error("cannot open session '" + session_path + "'");
    auto out = make_sink(sink, cfg.osc_out);
    const ReplayStats stats = replay(cfg, in, *out, ReplayMode::fast);
    py::dict d;
    d["frames"] = stats.frames;
    d["updates"] = stats.updates;
    d["rejected"] = stats.rejected;
    d["median_us"] = stats.median_micros();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Body-keypoint to OSC control engine";

    // translators run most-recent first, so the base class goes in first
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.attr("KEYPOINTS") = [] {
        py::list names;
        for (const auto n : kKeypointNames) names.append(std::string(n));
        return names;
    }();

    m.def("parse_frame", [](const std::string& text) { return frame_to_dict(parse_frame(text)); }, py::arg("text"),
          "Parse one wire record into {'t': ms, 'kp': {name: (x, y, confidence)}}");
    m.def("serialize_frame", [](const py::dict& d) { return serialize_frame(frame_from_dict(d)); }, py::arg("frame"),
          "Canonical wire record for a frame dict");

    m.def("map_linear", &map_linear, py::arg("s"));
    m.def("map_exp_db", [](double s, double db_floor, double gate) { return map_exp_db(s, ExpDb{db_floor, gate}); },
          py::arg("s"), py::arg("db_floor") = -60.0, py::arg("gate") = 0.02);
    m.def("map_exp_norm", [](double s, double k) { return map_exp_norm(s, ExpNorm{k}); }, py::arg("s"),
          py::arg("k") = 4.0);
    m.def("map_pitch", [](double u, double f0, double octaves) { return map_pitch(u, PitchExp{f0, octaves}); },
          py::arg("u"), py::arg("f0") = 220.0, py::arg("octaves") = 2.0);
    m.def("normalize_speed",
          [](double s_bl, double s_max) {
              SpeedCalibration cal;
              cal.s_max = s_max;
              cal.validate();
              return normalize_speed(s_bl, cal);
          },
          py::arg("s_bl"), py::arg("s_max") = 6.0);
    m.def("calibrate", [](const std::vector<double>& speeds, double p) { return calibrate(speeds, p).s_max; },
          py::arg("speeds"), py::arg("percentile") = 95.0, "Nearest-rank percentile full-scale speed");
    m.def("jnd_analyze", &jnd, py::arg("function"), py::arg("params") = std::map<std::string, double>{},
          py::arg("w_in") = 0.1, py::arg("l_jnd") = 1.0, py::arg("grid") = 200);

    m.def("encode_osc",
          [](const std::string& address, float value) {
              const Bytes b = encode_osc(address, value);
              return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
          },
          py::arg("address"), py::arg("value"));

    m.def("normalize_frame", &normalize_frame, py::arg("record"), py::arg("strategy") = "body_scaled",
          py::arg("arm_length") = 0.25, "(u, v) per present keypoint for one wire record");

    m.def("validate_config", [](const std::string& path) { return load_config(path).mappings.size(); },
          py::arg("path"), "Load and validate a configuration; returns the mapping count");
    m.def("replay", &replay_file, py::arg("config"), py::arg("session"), py::arg("sink"),
          "Fast replay of a session into a sink ('capture:<file>', 'csv:<file>' or 'udp')");
}
