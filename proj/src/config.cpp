#include "bodyctl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bodyctl/error.hpp"

namespace bodyctl {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key)
{
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& path)
{
    if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void only_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> keys)
{
    for (const auto& [key, _] : j.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(join(path, key), "unknown field");
    }
}

double number(const json& j, const std::string& path)
{
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

std::string string(const json& j, const std::string& path)
{
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

void read_number(const json& obj, std::string_view key, const std::string& path, double& slot)
{
    if (auto it = obj.find(key); it != obj.end()) slot = number(*it, join(path, key));
}

Keypoint keypoint(const json& j, const std::string& path)
{
    const auto name = string(j, path);
    const auto k = keypoint_from_name(name);
    if (!k) throw ConfigError(path, "unknown keypoint '" + name + "'");
    return *k;
}

Endpoint endpoint(const json& j, const std::string& path, std::string_view default_host)
{
    try {
        return parse_endpoint(string(j, path), default_host);
    } catch (const ConfigError& e) {
        if (!e.path().empty()) throw;
        throw ConfigError(path, e.what());
    }
}

StrategyParams parse_strategy(const json& j, const std::string& path)
{
    StrategyParams s;
    if (j.is_string()) {
        const auto k = strategy_from_name(j.get<std::string>());
        if (!k) throw ConfigError(path, "unknown strategy '" + j.get<std::string>() + "'");
        s.kind = *k;
        return s;
    }
    require_object(j, path);
    only_keys(j, path, {"kind", "arm_length", "out_mult", "in_mult", "v_up_mult", "v_down_mult", "tau_ref"});
    if (auto it = j.find("kind"); it != j.end()) {
        const auto name = string(*it, join(path, "kind"));
        const auto k = strategy_from_name(name);
        if (!k) throw ConfigError(join(path, "kind"), "unknown strategy '" + name + "'");
        s.kind = *k;
    }
    read_number(j, "arm_length", path, s.shoulder_anchor.arm_length);
    read_number(j, "out_mult", path, s.body_scaled.out_mult);
    read_number(j, "in_mult", path, s.body_scaled.in_mult);
    read_number(j, "v_up_mult", path, s.body_scaled.v_up_mult);
    read_number(j, "v_down_mult", path, s.body_scaled.v_down_mult);
    read_number(j, "tau_ref", path, s.tau_ref);
    return s;
}

SmootherConfig parse_smoother(const json& j, const std::string& path)
{
    require_object(j, path);
    only_keys(j, path, {"tau", "c_min", "t_hold"});
    SmootherConfig s;
    read_number(j, "tau", path, s.tau);
    read_number(j, "c_min", path, s.c_min);
    read_number(j, "t_hold", path, s.t_hold);
    return s;
}

SpeedCalibration parse_calibration(const json& j, const std::string& path)
{
    require_object(j, path);
    only_keys(j, path, {"s_max", "method", "percentile"});
    SpeedCalibration c;
    read_number(j, "s_max", path, c.s_max);
    read_number(j, "percentile", path, c.percentile);
    if (auto it = j.find("method"); it != j.end()) {
        const auto m = string(*it, join(path, "method"));
        if (m == "fixed") {
            c.method = SpeedCalibration::Method::fixed;
        } else if (m == "percentile") {
            c.method = SpeedCalibration::Method::percentile;
        } else {
            throw ConfigError(join(path, "method"), "expected fixed | percentile");
        }
    }
    return c;
}

MappingFn parse_function(const json& j, const std::string& path)
{
    if (j.is_string()) return make_function(j.get<std::string>(), {}, path);
    require_object(j, path);
    const auto kind = j.find("kind");
    if (kind == j.end()) throw ConfigError(join(path, "kind"), "missing");
    std::map<std::string, double> params;
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") continue;
        params[key] = number(value, join(path, key));
    }
    return make_function(string(*kind, join(path, "kind")), params, path);
}

MappingSpec parse_mapping(const json& j, const std::string& path)
{
    require_object(j, path);
    only_keys(j, path, {"id", "source", "strategy", "function", "out_address", "out_range", "send_on_invalid"});
    MappingSpec m;
    const auto id = j.find("id");
    if (id == j.end()) throw ConfigError(join(path, "id"), "missing");
    m.id = string(*id, join(path, "id"));
    const std::string at = path + " (" + m.id + ")";

    const auto source = j.find("source");
    if (source == j.end()) throw ConfigError(join(at, "source"), "missing");
    require_object(*source, join(at, "source"));
    only_keys(*source, join(at, "source"), {"point", "feature", "pair"});
    if (!source->contains("point")) throw ConfigError(join(at, "source.point"), "missing");
    m.source.point = keypoint(source->at("point"), join(at, "source.point"));
    if (!source->contains("feature")) throw ConfigError(join(at, "source.feature"), "missing");
    const auto feature_name = string(source->at("feature"), join(at, "source.feature"));
    const auto feature = feature_from_name(feature_name);
    if (!feature) throw ConfigError(join(at, "source.feature"), "unknown feature '" + feature_name + "'");
    m.source.feature = *feature;
    if (auto it = source->find("pair"); it != source->end())
        m.source.partner = keypoint(*it, join(at, "source.pair"));

    if (auto it = j.find("strategy"); it != j.end()) {
        const auto name = string(*it, join(at, "strategy"));
        const auto k = strategy_from_name(name);
        if (!k) throw ConfigError(join(at, "strategy"), "unknown strategy '" + name + "'");
        m.strategy = *k;
    }

    const auto fn = j.find("function");
    m.function = fn == j.end() ? MappingFn{ExpDb{}} : parse_function(*fn, join(at, "function"));

    const auto address = j.find("out_address");
    if (address == j.end()) throw ConfigError(join(at, "out_address"), "missing");
    m.out_address = string(*address, join(at, "out_address"));

    if (auto it = j.find("out_range"); it != j.end()) {
        if (!it->is_array() || it->size() != 2) throw ConfigError(join(at, "out_range"), "expected [lo, hi]");
        m.lo = number((*it)[0], join(at, "out_range[0]"));
        m.hi = number((*it)[1], join(at, "out_range[1]"));
    } else if (const auto* p = std::get_if<PitchExp>(&m.function)) {
        m.lo = p->f0;
        m.hi = p->f0 * std::exp2(p->octaves);
    }

    if (auto it = j.find("send_on_invalid"); it != j.end()) {
        if (!it->is_null()) m.send_on_invalid = number(*it, join(at, "send_on_invalid"));
    } else {
        m.send_on_invalid = MappingSpec::default_send_on_invalid(m.function, m.lo);
    }
    m.validate(path);
    return m;
}

std::vector<MappingSpec> parse_mappings(const json& j, const std::string& path)
{
    if (!j.is_array()) throw ConfigError(path, "expected an array");
    std::vector<MappingSpec> out;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_mapping(j[i], index(path, i)));
        if (!ids.insert(out.back().id).second)
            throw ConfigError(index(path, i) + ".id", "duplicate mapping id '" + out.back().id + "'");
    }
    return out;
}

} // namespace

void EngineConfig::validate() const
{
    strategy.validate();
    smoother.validate();
    calibration.validate();
    if (mappings.empty()) throw ConfigError("mappings", "at least one mapping is required");
    for (std::size_t i = 0; i < mappings.size(); ++i) mappings[i].validate(index("mappings", i));
    for (const auto& [name, specs] : presets) {
        if (specs.empty()) throw ConfigError("presets." + name, "at least one mapping is required");
        for (std::size_t i = 0; i < specs.size(); ++i) specs[i].validate(index("presets." + name, i));
    }
    if (!(telemetry_rate >= 1.0 && telemetry_rate <= 60.0))
        throw ConfigError("telemetry_rate", "must be within [1, 60] Hz");
    if (!(only_on_change.epsilon >= 0.0)) throw ConfigError("only_on_change.epsilon", "must be >= 0");
    if (ingest_queue == 0) throw ConfigError("ingest_queue", "must be >= 1");
}

std::vector<PointPair> EngineConfig::all_pairs() const
{
    std::vector<PointPair> pairs = relative_pairs;
    auto add = [&](const MappingSpec& m) {
        if (m.source.feature != FeatureKind::rel_speed) return;
        const PointPair p{m.source.point, *m.source.partner};
        const PointPair q{p.second, p.first};
        if (std::find(pairs.begin(), pairs.end(), p) == pairs.end() &&
            std::find(pairs.begin(), pairs.end(), q) == pairs.end())
            pairs.push_back(p);
    };
    for (const auto& m : mappings) add(m);
    for (const auto& [_, specs] : presets) {
        for (const auto& m : specs) add(m);
    }
    return pairs;
}

EngineConfig parse_config(std::string_view text)
{
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("parse error: ") + e.what());
    }
    require_object(j, "");
    only_keys(j, "", {"listen", "osc_out", "strategy", "smoother", "calibration", "mappings", "presets",
                      "relative_pairs", "telemetry_rate", "only_on_change", "ingest_queue"});
    EngineConfig cfg;
    if (auto it = j.find("listen"); it != j.end()) cfg.listen = endpoint(*it, "listen", "0.0.0.0");
    if (auto it = j.find("osc_out"); it != j.end()) cfg.osc_out = endpoint(*it, "osc_out", "127.0.0.1");
    if (auto it = j.find("strategy"); it != j.end()) cfg.strategy = parse_strategy(*it, "strategy");
    if (auto it = j.find("smoother"); it != j.end()) cfg.smoother = parse_smoother(*it, "smoother");
    if (auto it = j.find("calibration"); it != j.end()) cfg.calibration = parse_calibration(*it, "calibration");
    if (auto it = j.find("mappings"); it != j.end()) cfg.mappings = parse_mappings(*it, "mappings");
    if (auto it = j.find("presets"); it != j.end()) {
        require_object(*it, "presets");
        for (const auto& [name, specs] : it->items()) cfg.presets[name] = parse_mappings(specs, "presets." + name);
    }
    if (auto it = j.find("relative_pairs"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("relative_pairs", "expected an array of [a, b]");
        cfg.relative_pairs.clear();
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& p = (*it)[i];
            const auto at = index("relative_pairs", i);
            if (!p.is_array() || p.size() != 2) throw ConfigError(at, "expected [a, b]");
            cfg.relative_pairs.emplace_back(keypoint(p[0], at + "[0]"), keypoint(p[1], at + "[1]"));
        }
    }
    read_number(j, "telemetry_rate", "", cfg.telemetry_rate);
    if (auto it = j.find("only_on_change"); it != j.end()) {
        if (it->is_boolean()) {
            cfg.only_on_change.enabled = it->get<bool>();
        } else {
            require_object(*it, "only_on_change");
            only_keys(*it, "only_on_change", {"enabled", "epsilon"});
            if (auto e = it->find("enabled"); e != it->end()) {
                if (!e->is_boolean()) throw ConfigError("only_on_change.enabled", "expected a boolean");
                cfg.only_on_change.enabled = e->get<bool>();
            }
            read_number(*it, "epsilon", "only_on_change", cfg.only_on_change.epsilon);
        }
    }
    if (auto it = j.find("ingest_queue"); it != j.end()) {
        if (!it->is_number_unsigned()) throw ConfigError("ingest_queue", "expected a positive integer");
        cfg.ingest_queue = it->get<std::size_t>();
    }
    cfg.validate();
    return cfg;
}

EngineConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw ConfigError("", "cannot open config '" + file.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace bodyctl
