#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bodyctl {

struct Linear
{
};

// Level in dB is affine in s; below the gate the output is exact silence.
struct ExpDb
{
    double db_floor = -60.0;
    double gate = 0.02;
};

// (e^{ks} - 1) / (e^k - 1): reaches exact zero at rest without a gate.
struct ExpNorm
{
    double k = 4.0;
};

// Theremin-style: f0 * 2^(octaves * u).
struct PitchExp
{
    double f0 = 220.0;
    double octaves = 2.0;
};

using MappingFn = std::variant<Linear, ExpDb, ExpNorm, PitchExp>;

std::string_view function_name(const MappingFn& fn);
bool is_pitch(const MappingFn& fn);

/// Throws ConfigError (rooted at `path`) when a parameter violates its domain.
void validate(const MappingFn& fn, const std::string& path = "function");

/// Builds a function from its name ("linear", "exp_db", "exp_norm", "pitch_exp") and named
/// parameters; unspecified parameters keep their defaults. Throws ConfigError.
MappingFn make_function(std::string_view name, const std::map<std::string, double>& params = {},
                        const std::string& path = "function");

double map_linear(double s);
double map_exp_db(double s, const ExpDb& fn);
double map_exp_norm(double s, const ExpNorm& fn);
double map_pitch(double u, const PitchExp& fn);

/// Evaluates any function: amplitude in [0,1], or Hz for pitch.
double apply(const MappingFn& fn, double s);

/// Speed below which an amplitude function is silent (0 for gateless forms).
double gate_of(const MappingFn& fn);

struct SpeedCalibration
{
    enum class Method { fixed, percentile };

    double s_max = 6.0; // body lengths per second at full scale
    Method method = Method::fixed;
    double percentile = 95.0;

    void validate() const;
};

/// min(s_bl / s_max, 1); negative input clamps to 0.
double normalize_speed(double s_bl, const SpeedCalibration& cal);

inline constexpr std::size_t kMinCalibrationSamples = 30;

/// Nearest-rank percentile of the samples. Throws Error with fewer than 30 samples.
SpeedCalibration calibrate(std::span<const double> speeds, double percentile = 95.0);

/// n uniform points (i+1)/n, i = 0..n-1: excludes the rest position, includes full scale.
std::vector<double> analysis_grid(std::size_t n = 200);

struct JndOptions
{
    double w_in = 0.1;  // input Weber fraction
    double l_jnd = 1.0; // output JND, dB
    std::size_t grid = 200;
};

struct JndPoint
{
    double s = 0.0;
    double step_db = 0.0;
    bool perceptible = false;
};

struct JndReport
{
    JndOptions options;
    std::vector<JndPoint> points; // only grid points where a step is defined
    std::size_t excluded = 0;
    std::optional<double> uniformity_ratio; // max/min step over the perceptible points

    std::size_t perceptible_count() const;
};

/// Output level step produced by one input JND across the grid. Throws Error for pitch
/// functions or non-positive w_in / l_jnd.
JndReport jnd_analyze(const MappingFn& fn, const JndOptions& opts = {});

/// CSV: s,step_db,perceptible
void write_jnd_csv(std::ostream& out, const JndReport& report);
/// CSV: s,m
void write_curve_csv(std::ostream& out, const MappingFn& fn, std::size_t grid = 200);

} // namespace bodyctl
