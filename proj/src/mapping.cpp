#include "bodyctl/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bodyctl/error.hpp"
#include "bodyctl/pose_wire.hpp"

namespace bodyctl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string_view function_name(const MappingFn& fn)
{
    return std::visit(overloaded{[](const Linear&) { return "linear"; }, [](const ExpDb&) { return "exp_db"; },
                                 [](const ExpNorm&) { return "exp_norm"; },
                                 [](const PitchExp&) { return "pitch_exp"; }},
                      fn);
}

bool is_pitch(const MappingFn& fn) { return std::holds_alternative<PitchExp>(fn); }

void validate(const MappingFn& fn, const std::string& path)
{
    auto require = [&](bool ok, const char* field, const char* rule) {
        if (!ok) throw ConfigError(path + "." + field, rule);
    };
    std::visit(overloaded{[](const Linear&) {},
                          [&](const ExpDb& f) {
                              require(f.db_floor < 0.0 && std::isfinite(f.db_floor), "db_floor", "must be < 0");
                              require(f.gate >= 0.0 && f.gate < 1.0, "gate", "must be within [0,1)");
                          },
                          [&](const ExpNorm& f) { require(f.k > 0.0 && std::isfinite(f.k), "k", "must be > 0"); },
                          [&](const PitchExp& f) {
                              require(f.f0 > 0.0 && std::isfinite(f.f0), "f0", "must be > 0");
                              require(f.octaves > 0.0 && std::isfinite(f.octaves), "octaves", "must be > 0");
                          }},
               fn);
}

MappingFn make_function(std::string_view name, const std::map<std::string, double>& params, const std::string& path)
{
    std::vector<std::string> allowed;
    MappingFn fn;
    auto take = [&](const char* key, double& slot) {
        allowed.emplace_back(key);
        if (auto it = params.find(key); it != params.end()) slot = it->second;
    };
    if (name == "linear") {
        fn = Linear{};
    } else if (name == "exp_db") {
        ExpDb f;
        take("db_floor", f.db_floor);
        take("gate", f.gate);
        fn = f;
    } else if (name == "exp_norm") {
        ExpNorm f;
        take("k", f.k);
        fn = f;
    } else if (name == "pitch_exp") {
        PitchExp f;
        take("f0", f.f0);
        take("octaves", f.octaves);
        fn = f;
    } else {
        throw ConfigError(path + ".kind", "unknown mapping function '" + std::string(name) + "'");
    }
    for (const auto& [key, _] : params) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(path + "." + key, "not a parameter of " + std::string(name));
    }
    validate(fn, path);
    return fn;
}

double map_linear(double s) { return s; }

double map_exp_db(double s, const ExpDb& fn)
{
    if (s < fn.gate) return 0.0;
    return std::pow(10.0, fn.db_floor * (1.0 - s) / 20.0);
}

double map_exp_norm(double s, const ExpNorm& fn) { return std::expm1(fn.k * s) / std::expm1(fn.k); }

double map_pitch(double u, const PitchExp& fn) { return fn.f0 * std::exp2(fn.octaves * u); }

double apply(const MappingFn& fn, double s)
{
    return std::visit(overloaded{[&](const Linear&) { return map_linear(s); },
                                 [&](const ExpDb& f) { return map_exp_db(s, f); },
                                 [&](const ExpNorm& f) { return map_exp_norm(s, f); },
                                 [&](const PitchExp& f) { return map_pitch(s, f); }},
                      fn);
}

double gate_of(const MappingFn& fn)
{
    if (const auto* f = std::get_if<ExpDb>(&fn)) return f->gate;
    return 0.0;
}

void SpeedCalibration::validate() const
{
    if (!(s_max > 0.0) || !std::isfinite(s_max)) throw ConfigError("calibration.s_max", "must be > 0");
    if (method == Method::percentile && !(percentile > 0.0 && percentile <= 100.0))
        throw ConfigError("calibration.percentile", "must be within (0,100]");
}

double normalize_speed(double s_bl, const SpeedCalibration& cal)
{
    return std::clamp(s_bl / cal.s_max, 0.0, 1.0);
}

SpeedCalibration calibrate(std::span<const double> speeds, double percentile)
{
    if (speeds.size() < kMinCalibrationSamples) {
        throw Error("too few calibration samples: " + std::to_string(speeds.size()) + " (need at least " +
                    std::to_string(kMinCalibrationSamples) + ")");
    }
    if (!(percentile > 0.0 && percentile <= 100.0)) throw Error("percentile must be within (0,100]");
    std::vector<double> sorted(speeds.begin(), speeds.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(percentile * n / 100.0));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());

    SpeedCalibration cal;
    cal.method = SpeedCalibration::Method::percentile;
    cal.percentile = percentile;
    cal.s_max = sorted[rank - 1];
    if (!(cal.s_max > 0.0)) throw Error("calibration percentile is zero; performer did not move");
    return cal;
}

std::vector<double> analysis_grid(std::size_t n)
{
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = static_cast<double>(i + 1) / static_cast<double>(n);
    return grid;
}

std::size_t JndReport::perceptible_count() const
{
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [](const JndPoint& p) { return p.perceptible; }));
}

JndReport jnd_analyze(const MappingFn& fn, const JndOptions& opts)
{
    if (is_pitch(fn)) throw Error("JND analysis needs an amplitude mapping, got pitch_exp");
    if (!(opts.w_in > 0.0)) throw Error("w_in must be > 0");
    if (!(opts.l_jnd > 0.0)) throw Error("l_jnd must be > 0");
    validate(fn);

    JndReport report;
    report.options = opts;
    const double gate = gate_of(fn);
    double lo = 0.0;
    double hi = 0.0;
    for (const double s : analysis_grid(opts.grid)) {
        const double s_next = s * (1.0 + opts.w_in);
        const double m = apply(fn, s);
        if (s < gate || s_next > 1.0 || !(m > 0.0)) {
            ++report.excluded;
            continue;
        }
        JndPoint p;
        p.s = s;
        p.step_db = 20.0 * std::log10(apply(fn, s_next) / m);
        p.perceptible = p.step_db >= opts.l_jnd;
        if (p.perceptible) {
            lo = report.uniformity_ratio ? std::min(lo, p.step_db) : p.step_db;
            hi = report.uniformity_ratio ? std::max(hi, p.step_db) : p.step_db;
            report.uniformity_ratio = hi / lo;
        }
        report.points.push_back(p);
    }
    return report;
}

void write_jnd_csv(std::ostream& out, const JndReport& report)
{
    out << "s,step_db,perceptible\n";
    for (const auto& p : report.points) {
        out << format_number(p.s) << ',' << format_number(p.step_db) << ',' << (p.perceptible ? 1 : 0) << '\n';
    }
}

void write_curve_csv(std::ostream& out, const MappingFn& fn, std::size_t grid)
{
    out << "s,m\n";
    for (const double s : analysis_grid(grid)) out << format_number(s) << ',' << format_number(apply(fn, s)) << '\n';
}

} // namespace bodyctl
