#include "bodyctl/replay.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <sstream>
#include <string>
#include <thread>

#include "bodyctl/error.hpp"
#include "bodyctl/pipeline.hpp"

namespace bodyctl {

double ReplayStats::median_micros() const
{
    if (frame_micros.empty()) return 0.0;
    std::vector<double> v = frame_micros;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

ReplayStats replay(const EngineConfig& config, std::istream& session, UpdateSink& sink, ReplayMode mode)
{
    std::vector<std::string> lines;
    {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(session, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            try {
                parse_frame(line);
            } catch (const ParseError& e) {
                throw ParseError(e.what(), line_no);
            }
            lines.push_back(std::move(line));
        }
    }

    using clock = std::chrono::steady_clock;
    Pipeline pipeline(config);
    ReplayStats stats;
    stats.frame_micros.reserve(lines.size());
    std::optional<double> t0;
    clock::time_point start;

    for (const auto& line : lines) {
        const auto parse_began = clock::now();
        const PoseFrame frame = parse_frame(line);
        const auto parsed = clock::now() - parse_began;
        if (mode == ReplayMode::realtime) {
            if (!t0) {
                t0 = frame.t;
                start = clock::now();
            } else {
                const std::chrono::duration<double, std::milli> offset(frame.t - *t0);
                std::this_thread::sleep_until(start + std::chrono::duration_cast<clock::duration>(offset));
            }
        }
        const auto work_began = clock::now();
        std::vector<ParamUpdate> updates;
        try {
            updates = pipeline.process(frame);
        } catch (const TimestampError&) {
            ++stats.rejected;
            continue;
        }
        for (const auto& u : updates) stats.bytes += encode_osc(u).size();
        const auto worked = clock::now() - work_began;
        stats.frame_micros.push_back(std::chrono::duration<double, std::micro>(parsed + worked).count());

        sink.send(updates);
        ++stats.frames;
        stats.updates += updates.size();
    }
    return stats;
}

std::vector<double> session_body_speeds(const EngineConfig& config, const std::vector<PoseFrame>& frames)
{
    KinematicsTracker kinematics(config.smoother, config.all_pairs());
    RefsTracker refs(config.strategy.tau_ref);
    const auto points = calibration_points(config.mappings);
    std::vector<double> speeds;
    for (const auto& frame : frames) {
        if (kinematics.last_t() && !(frame.t > *kinematics.last_t())) continue;
        const auto& f = kinematics.push(frame);
        const auto& r = refs.push(f);
        for (const auto k : points) {
            if (!f.at(k).valid) continue;
            if (const auto s = body_speed(f.at(k).speed, r)) speeds.push_back(*s);
        }
    }
    return speeds;
}

} // namespace bodyctl
