#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bodyctl/config.hpp"
#include "bodyctl/pose_wire.hpp"
#include "bodyctl/sinks.hpp"

namespace bodyctl {

struct ReplayStats
{
    std::size_t frames = 0;
    std::size_t updates = 0;
    std::size_t rejected = 0;         // timestamp regressions
    std::size_t bytes = 0;            // encoded OSC bytes
    std::vector<double> frame_micros; // parse through encode, per frame

    double median_micros() const;
};

/// Runs the live pipeline over a recorded session. The virtual clock is driven by frame
/// timestamps, so fast mode output depends only on (config, session). The whole session is
/// validated before the first update reaches the sink; throws ParseError on a bad line.
ReplayStats replay(const EngineConfig& config, std::istream& session, UpdateSink& sink, ReplayMode mode);

/// Body speeds (body lengths per second) of the calibration points over a session, one
/// sample per valid point per frame.
std::vector<double> session_body_speeds(const EngineConfig& config, const std::vector<PoseFrame>& frames);

} // namespace bodyctl
