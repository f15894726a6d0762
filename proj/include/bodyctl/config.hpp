#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bodyctl/body_frame.hpp"
#include "bodyctl/kinematics.hpp"
#include "bodyctl/mapping.hpp"
#include "bodyctl/router.hpp"
#include "bodyctl/sinks.hpp"

namespace bodyctl {

struct OnlyOnChange
{
    bool enabled = false;
    double epsilon = 1e-4;
};

struct EngineConfig
{
    Endpoint listen{"0.0.0.0", 9000};
    Endpoint osc_out{"127.0.0.1", 57120};
    StrategyParams strategy;
    SmootherConfig smoother;
    SpeedCalibration calibration;
    std::vector<MappingSpec> mappings;
    std::map<std::string, std::vector<MappingSpec>> presets; // selectable from the UI
    std::vector<PointPair> relative_pairs = default_pairs();
    double telemetry_rate = 30.0; // Hz
    OnlyOnChange only_on_change;
    std::size_t ingest_queue = 8; // frames buffered ahead of the pipeline

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Configured pairs plus every pair referenced by a rel_speed mapping (including presets).
    std::vector<PointPair> all_pairs() const;
};

/// Parses and validates a JSON configuration, filling defaults. Throws ConfigError.
EngineConfig parse_config(std::string_view text);
EngineConfig load_config(const std::filesystem::path& file);

} // namespace bodyctl
