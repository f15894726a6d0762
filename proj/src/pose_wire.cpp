#include "bodyctl/pose_wire.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "bodyctl/error.hpp"

namespace bodyctl {

using nlohmann::json;

void PoseFrame::add(const RawKeypoint& kp)
{
    auto& slot = slots_[index_of(kp.name)];
    if (slot) throw ParseError("duplicate keypoint '" + std::string(name_of(kp.name)) + "'");
    slot = kp;
}

std::size_t PoseFrame::size() const
{
    std::size_t n = 0;
    for (const auto& s : slots_) n += s.has_value();
    return n;
}

std::vector<RawKeypoint> PoseFrame::keypoints() const
{
    std::vector<RawKeypoint> out;
    for (const auto& s : slots_) {
        if (s) out.push_back(*s);
    }
    return out;
}

namespace {

json parse_rejecting_duplicate_keys(std::string_view text)
{
    std::vector<std::set<std::string>> open_objects;
    std::string duplicate;
    json::parser_callback_t cb = [&](int, json::parse_event_t ev, json& parsed) {
        switch (ev) {
        case json::parse_event_t::object_start:
            open_objects.emplace_back();
            break;
        case json::parse_event_t::object_end:
            open_objects.pop_back();
            break;
        case json::parse_event_t::key:
            if (!open_objects.back().insert(parsed.get<std::string>()).second && duplicate.empty())
                duplicate = parsed.get<std::string>();
            break;
        default:
            break;
        }
        return true;
    };
    json j;
    try {
        j = json::parse(text.begin(), text.end(), cb);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed record: ") + e.what());
    }
    if (!duplicate.empty()) throw ParseError("duplicate key '" + duplicate + "'");
    return j;
}

double unit_interval(const json& v, std::string_view what, std::string_view name)
{
    if (!v.is_number()) throw ParseError(std::string(what) + " of '" + std::string(name) + "' is not a number");
    const double d = v.get<double>();
    if (!(d >= 0.0 && d <= 1.0))
        throw ParseError(std::string(what) + " of '" + std::string(name) + "' out of [0,1]: " + format_number(d));
    return d;
}

} // namespace

PoseFrame parse_frame(std::string_view text)
{
    const json j = parse_rejecting_duplicate_keys(text);
    if (!j.is_object()) throw ParseError("malformed record: not an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "t" && key != "kp") throw ParseError("malformed record: unexpected field '" + key + "'");
    }
    const auto t = j.find("t");
    if (t == j.end()) throw ParseError("missing timestamp");
    if (!t->is_number()) throw ParseError("timestamp is not a number");
    const auto kp = j.find("kp");
    if (kp == j.end() || !kp->is_object()) throw ParseError("malformed record: 'kp' must be an object");

    PoseFrame frame(t->get<double>());
    for (const auto& [key, value] : kp->items()) {
        const auto name = keypoint_from_name(key);
        if (!name) throw ParseError("unknown keypoint name '" + key + "'");
        if (!value.is_array() || value.size() != 3)
            throw ParseError("keypoint '" + key + "' must be [x, y, confidence]");
        frame.add(RawKeypoint{*name, unit_interval(value[0], "x", key), unit_interval(value[1], "y", key),
                              unit_interval(value[2], "confidence", key)});
    }
    return frame;
}

std::string format_number(double v)
{
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::string serialize_frame(const PoseFrame& frame)
{
    std::string out = "{\"t\":" + format_number(frame.t) + ",\"kp\":{";
    bool first = true;
    for (const auto& kp : frame.keypoints()) {
        if (!first) out += ',';
        first = false;
        out += '"';
        out += name_of(kp.name);
        out += "\":[" + format_number(kp.x) + ',' + format_number(kp.y) + ',' + format_number(kp.confidence) + ']';
    }
    out += "}}";
    return out;
}

bool SessionRecorder::write(const PoseFrame& frame)
{
    if (last_t_ && frame.t < *last_t_) {
        ++result_.regressions;
        return false;
    }
    sink_ << serialize_frame(frame) << '\n';
    sink_.flush();
    if (!sink_) throw Error("session sink write failed");
    last_t_ = frame.t;
    ++result_.written;
    return true;
}

RecordResult record_session(const std::vector<PoseFrame>& frames, std::ostream& sink)
{
    SessionRecorder rec(sink);
    for (const auto& f : frames) rec.write(f);
    return rec.result();
}

std::size_t replay_session(std::istream& source, ReplayMode mode,
                           const std::function<void(const PoseFrame&)>& emit)
{
    using clock = std::chrono::steady_clock;
    std::string line;
    std::size_t line_no = 0;
    std::size_t emitted = 0;
    std::optional<double> t0;
    clock::time_point start;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        PoseFrame frame;
        try {
            frame = parse_frame(line);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
        if (mode == ReplayMode::realtime) {
            if (!t0) {
                t0 = frame.t;
                start = clock::now();
            } else {
                const auto offset = std::chrono::duration<double, std::milli>(frame.t - *t0);
                std::this_thread::sleep_until(start + std::chrono::duration_cast<clock::duration>(offset));
            }
        }
        emit(frame);
        ++emitted;
    }
    return emitted;
}

std::vector<PoseFrame> read_session(std::istream& source)
{
    std::vector<PoseFrame> frames;
    replay_session(source, ReplayMode::fast, [&](const PoseFrame& f) { frames.push_back(f); });
    return frames;
}

} // namespace bodyctl
