// Exit criteria. One PASS/FAIL line per criterion; nonzero exit if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "bodyctl/body_frame.hpp"
#include "bodyctl/config.hpp"
#include "bodyctl/kinematics.hpp"
#include "bodyctl/mapping.hpp"
#include "bodyctl/osc.hpp"
#include "bodyctl/replay.hpp"
#include "bodyctl/router.hpp"
#include "support/bodies.hpp"
#include "support/osc_reference.hpp"

using namespace bodyctl;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check)
{
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

BodyRefs refs_of(const bodies::Body& b) { return compute_refs(bodies::features_of(b), std::nullopt, 500.0); }

// --- criteria -------------------------------------------------------------------------------

Outcome similarity_invariance()
{
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> scale(0.3, 3.0);
    std::uniform_real_distribution<double> shift(-2.0, 2.0);
    std::uniform_real_distribution<double> speed(0.0, 3.0);
    const BodyScaled strat;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto b = bodies::random_body(rng);
        const double sigma = scale(rng);
        const Vec2 d{shift(rng), shift(rng)};
        const auto m = bodies::transform(b, [&](Vec2 p) { return sigma * p + d; });
        const auto r0 = refs_of(b);
        const auto r1 = refs_of(m);
        const std::pair<Keypoint, std::pair<Vec2, Vec2>> pts[] = {
            {Keypoint::right_wrist, {b.right_wrist, m.right_wrist}},
            {Keypoint::left_wrist, {b.left_wrist, m.left_wrist}},
            {Keypoint::right_ankle, {b.right_ankle, m.right_ankle}},
            {Keypoint::left_ankle, {b.left_ankle, m.left_ankle}},
        };
        for (const auto& [k, pq] : pts) {
            const auto a = normalize(k, pq.first, r0, strat);
            const auto c = normalize(k, pq.second, r1, strat);
            if (!a || !c) return {false, "normalization unexpectedly invalid"};
            worst = std::max({worst, std::abs(a->u - c->u), std::abs(a->v - c->v)});
        }
        const double s = speed(rng);
        worst = std::max(worst, std::abs(*body_speed(s, r0) - *body_speed(sigma * s, r1)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst < 1e-9 && secs < 1.0, fmt("max |d| = %.2e (< 1e-9) over 1000 frames in %.3f s (< 1 s)", worst, secs)};
}

Outcome non_invariance()
{
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> shift(-0.5, 0.5);
    std::uniform_real_distribution<double> offset(-0.25, 0.25);
    const ShoulderAnchor strat{0.25};
    int changed = 0;
    int total = 0;
    for (int i = 0; i < 1000; ++i) {
        auto b = bodies::random_body(rng);
        // keep the wrist inside the reach so the unclamped region is exercised
        b.right_wrist = b.right_shoulder + Vec2{offset(rng), offset(rng)};
        const Vec2 d{shift(rng), shift(rng)};
        const auto m = bodies::transform(b, [&](Vec2 p) { return 2.0 * p + d; });
        const auto a = normalize(Keypoint::right_wrist, b.right_wrist, refs_of(b), strat);
        const auto c = normalize(Keypoint::right_wrist, m.right_wrist, refs_of(m), strat);
        if (!a || !c) continue;
        ++total;
        if (a->u != c->u) ++changed;
    }
    const double share = total ? static_cast<double>(changed) / total : 0.0;
    return {total >= 990 && share >= 0.99, fmt("u changed in %d/%d frames (%.1f%%, >= 99%%)", changed, total, 100 * share)};
}

Outcome weber_property()
{
    const ExpDb fn{-60.0, 0.02};
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double s = 0.02 + (0.9 - 0.02) * i / 49.0;
        const double step = 20.0 * std::log10(map_exp_db(s + 0.1, fn) / map_exp_db(s, fn));
        worst = std::max(worst, std::abs(step - 6.0));
    }
    return {worst < 1e-9, fmt("max |step - 6.0 dB| = %.2e (< 1e-9) at 50 points", worst)};
}

Outcome jnd_reproduction()
{
    const auto lin = jnd_analyze(Linear{}, {0.1, 1.0, 200});
    const double expected = 20.0 * std::log10(1.1);
    double lin_worst = 0.0;
    for (const auto& p : lin.points) lin_worst = std::max(lin_worst, std::abs(p.step_db - expected));
    const bool lin_ok = !lin.points.empty() && lin.perceptible_count() == 0 && lin_worst < 1e-9;

    const auto db = jnd_analyze(ExpDb{-60.0, 0.02}, {0.1, 1.0, 200});
    const double h = 1.0 / 200.0;
    std::size_t misflagged = 0;
    double first = 2.0;
    for (const auto& p : db.points) {
        if (p.perceptible) first = std::min(first, p.s);
        if (p.s >= 1.0 / 6.0 + h && !p.perceptible) ++misflagged;
        if (p.s < 1.0 / 6.0 - h && p.perceptible) ++misflagged;
    }
    const bool db_ok = misflagged == 0 && std::abs(first - 1.0 / 6.0) <= h;
    return {lin_ok && db_ok,
            fmt("linear: %zu pts, 0 perceptible, step %.4f dB; exp_db: onset s=%.3f (1/6 +- %.3f), %zu misflagged",
                lin.points.size(), expected, first, h, misflagged)};
}

Outcome octave_law()
{
    const PitchExp fn{220.0, 2.0};
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double u = 0.5 * i / 99.0;
        worst = std::max(worst, std::abs(map_pitch(u + 0.5, fn) - 2.0 * map_pitch(u, fn)));
    }
    return {worst < 1e-9, fmt("max |f(u+0.5) - 2 f(u)| = %.2e Hz (< 1e-9) at 100 points", worst)};
}

Outcome velocity_oracle()
{
    const double fps = 30.0;
    const double peak = 0.2 * std::numbers::pi;
    SmootherConfig cfg;
    cfg.tau = 0.0; // alpha = 1
    PointState s;
    double worst_sample = 0.0;
    double worst_mid = 0.0;
    double worst_t = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double t = i / fps;
        const double x = 0.5 + 0.2 * std::sin(std::numbers::pi * t);
        s = update(s, RawKeypoint{Keypoint::nose, x, 0.5, 1.0}, 1000.0 * t, cfg);
        if (i == 0) continue;
        const double at_sample = peak * std::cos(std::numbers::pi * t);
        const double at_mid = peak * std::cos(std::numbers::pi * (t - 0.5 / fps));
        if (std::abs(s.v.x - at_sample) > worst_sample) {
            worst_sample = std::abs(s.v.x - at_sample);
            worst_t = t;
        }
        worst_mid = std::max(worst_mid, std::abs(s.v.x - at_mid));
    }
    const double rel = worst_sample / peak;
    return {rel <= 0.05, fmt("max error %.2f%% of peak at t=%.3f s (limit 5%%); vs interval midpoint %.3f%%",
                             100 * rel, worst_t, 100 * worst_mid / peak)};
}

Outcome osc_golden()
{
    const Bytes amp{0x2F, 0x61, 0x6D, 0x70, 0x00, 0x00, 0x00, 0x00, 0x2C, 0x66, 0x00, 0x00, 0x3F, 0x00, 0x00, 0x00};
    const Bytes a{0x2F, 0x61, 0x00, 0x00, 0x2C, 0x66, 0x00, 0x00, 0x3F, 0x80, 0x00, 0x00};
    const auto e1 = encode_osc("/amp", 0.5f);
    const auto e2 = encode_osc("/a", 1.0f);
    const bool ok = e1 == amp && e2 == a && e1.size() % 4 == 0 && e2.size() % 4 == 0;
    return {ok, fmt("(/amp,0.5) -> %zu bytes, (/a,1.0) -> %zu bytes", e1.size(), e2.size())};
}

std::string run_replay_to(const fs::path& out, const EngineConfig& cfg, const std::string& session_path)
{
    {
        std::ifstream session(session_path);
        CaptureFileSink sink(out.string());
        replay(cfg, session, sink, ReplayMode::fast);
    }
    std::ifstream in(out, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome replay_determinism()
{
    const auto cfg = load_config(std::string(BODYCTL_CONFIG_DIR) + "/example.json");
    const std::string session = std::string(BODYCTL_DATA_DIR) + "/sessions/synthetic_10s.jsonl";
    const auto dir = fs::temp_directory_path();
    const auto a = dir / "bodyctl_acceptance_a.cap";
    const auto b = dir / "bodyctl_acceptance_b.cap";
    const auto x = run_replay_to(a, cfg, session);
    const auto y = run_replay_to(b, cfg, session);
    fs::remove(a);
    fs::remove(b);
    return {!x.empty() && x == y, fmt("two fast replays: %zu and %zu bytes, identical=%s", x.size(), y.size(),
                                      x == y ? "yes" : "no")};
}

class NullSink final : public UpdateSink
{
public:
    std::size_t send(std::span<const ParamUpdate> updates) override { return updates.size(); }
};

Outcome latency_budget()
{
    const auto cfg = load_config(std::string(BODYCTL_CONFIG_DIR) + "/example.json");
    std::ifstream session(std::string(BODYCTL_DATA_DIR) + "/sessions/synthetic_10s.jsonl");
    NullSink sink;
    const auto stats = replay(cfg, session, sink, ReplayMode::fast);
    const double median = stats.median_micros();
    return {cfg.mappings.size() == 4 && median < 5000.0,
            fmt("median %.1f us/frame over %zu frames, %zu mappings (target < 1000 us: %s; ceiling 5000 us)", median,
                stats.frames, cfg.mappings.size(), median < 1000.0 ? "met" : "missed")};
}

// Module invariants, 1000 randomized cases each.
Outcome module_invariants()
{
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int checks = 0;
    std::string broken;
    auto expect = [&](bool ok, const char* what) {
        ++checks;
        if (!ok && broken.empty()) broken = what;
    };

    // kinematics: smoothed position stays in the hull of observations; relative velocity antisymmetric
    for (int n = 0; n < 1000; ++n) {
        SmootherConfig cfg{20.0 + 200.0 * unit(rng), 0.3, 300.0};
        PointState s;
        double lo = 1.0;
        double hi = 0.0;
        double t = 0.0;
        for (int k = 0; k < 20; ++k) {
            t += 10.0 + 50.0 * unit(rng);
            const double x = unit(rng);
            const double c = unit(rng);
            if (c >= cfg.c_min && !s.valid) {
                lo = 1.0;
                hi = 0.0;
            }
            if (c >= cfg.c_min) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            s = update(s, RawKeypoint{Keypoint::nose, x, 0.5, c}, t, cfg);
            if (s.valid) expect(s.p_hat.x >= lo - 1e-12 && s.p_hat.x <= hi + 1e-12, "kinematics hull");
        }
        std::array<PointState, kKeypointCount> states{};
        states[index_of(Keypoint::left_wrist)] = {{unit(rng), unit(rng)}, {unit(rng) - 0.5, unit(rng) - 0.5}, 0, 0.0, true};
        states[index_of(Keypoint::right_wrist)] = {{unit(rng), unit(rng)}, {unit(rng) - 0.5, unit(rng) - 0.5}, 0, 0.0, true};
        const auto f = features(states, default_pairs(), 0.0);
        const auto ab = f.relative_velocity(Keypoint::left_wrist, Keypoint::right_wrist);
        const auto ba = f.relative_velocity(Keypoint::right_wrist, Keypoint::left_wrist);
        expect(ab->velocity.x == -ba->velocity.x && ab->velocity.y == -ba->velocity.y, "relative antisymmetry");
    }

    // body frame: range for every strategy, monotone in outward displacement, mirror symmetry
    const std::array<ReferenceStrategy, 3> strategies{CameraCenter{}, ShoulderAnchor{0.25}, BodyScaled{}};
    std::uniform_real_distribution<double> wild(-10.0, 10.0);
    for (int n = 0; n < 1000; ++n) {
        const auto b = bodies::random_body(rng);
        const auto r = refs_of(b);
        const Vec2 p{wild(rng), wild(rng)};
        for (const auto& st : strategies) {
            const auto q = normalize(Keypoint::left_wrist, p, r, st);
            expect(q && q->u >= 0 && q->u <= 1 && q->v >= 0 && q->v <= 1, "position range");
        }
        const double dir = r.sgn;
        const double u1 = normalize_body_scaled(p, Side::right, r, {})->u;
        const double u2 = normalize_body_scaled({p.x + dir * unit(rng), p.y}, Side::right, r, {})->u;
        expect(u2 >= u1, "outward monotonicity");

        const double mid = 0.5 * (b.left_shoulder.x + b.right_shoulder.x);
        auto reflect = [&](Vec2 v) { return Vec2{2 * mid - v.x, v.y}; };
        bodies::Body m{reflect(b.right_shoulder), reflect(b.left_shoulder), reflect(b.right_hip),
                       reflect(b.left_hip),       reflect(b.right_wrist),   reflect(b.left_wrist),
                       reflect(b.right_ankle),    reflect(b.left_ankle)};
        const auto o = normalize_body_scaled(b.right_wrist, Side::right, r, {});
        const auto w = normalize_body_scaled(m.left_wrist, Side::left, refs_of(m), {});
        expect(std::abs(o->u - w->u) < 1e-9 && std::abs(o->v - w->v) < 1e-9, "mirror symmetry");
    }

    // mapping: monotone, endpoints, range, Weber, octave, JND closed form
    for (int n = 0; n < 1000; ++n) {
        const double s1 = unit(rng);
        const double s2 = std::min(1.0, s1 + unit(rng) * 0.2);
        const ExpDb db{-20.0 - 70.0 * unit(rng), 0.02};
        const ExpNorm en{0.1 + 8.0 * unit(rng)};
        for (const MappingFn fn : {MappingFn{Linear{}}, MappingFn{db}, MappingFn{en}}) {
            const double a1 = apply(fn, s1);
            const double a2 = apply(fn, s2);
            expect(a2 >= a1 && a1 >= 0 && a2 <= 1, "amplitude monotone and in range");
            expect(std::abs(apply(fn, 1.0) - 1.0) < 1e-15, "amplitude endpoint");
        }
        if (s1 >= db.gate && s2 > s1)
            expect(std::abs(20 * std::log10(map_exp_db(s2, db) / map_exp_db(s1, db)) + db.db_floor * (s2 - s1)) < 1e-9,
                   "Weber property");
        const PitchExp pe{55.0 + 400.0 * unit(rng), 0.5 + 3.0 * unit(rng)};
        const double u = unit(rng) * (1.0 - 1.0 / pe.octaves);
        if (u >= 0) expect(std::abs(map_pitch(u + 1.0 / pe.octaves, pe) / map_pitch(u, pe) - 2.0) < 1e-9, "octave law");
        const double f = map_pitch(unit(rng), pe);
        expect(f >= pe.f0 && f <= pe.f0 * std::exp2(pe.octaves) * (1 + 1e-15), "pitch range");
    }
    for (int n = 0; n < 10; ++n) {
        const ExpDb db{-20.0 - 70.0 * unit(rng), 0.02};
        const double w = 0.02 + 0.3 * unit(rng);
        const auto rep = jnd_analyze(db, {w, 1.0, 200});
        for (const auto& p : rep.points)
            expect(std::abs(p.step_db - (-db.db_floor) * w * p.s) < 1e-9, "JND closed form");
    }

    // router/osc: decode after encode, route determinism, clamping
    std::uniform_int_distribution<int> printable(0x21, 0x7E);
    std::uniform_int_distribution<std::uint32_t> bits;
    for (int n = 0; n < 1000; ++n) {
        std::string address = "/";
        for (int k = static_cast<int>(unit(rng) * 30); k > 0; --k) address.push_back(static_cast<char>(printable(rng)));
        const float value = std::bit_cast<float>(bits(rng));
        const auto enc = encode_osc(address, value);
        const auto dec = osc_reference::decode(enc);
        expect(enc.size() % 4 == 0 && dec && dec->address == address && dec->raw_args.size() == 1 &&
                   dec->raw_args[0] == std::bit_cast<std::uint32_t>(value),
               "OSC decode after encode");

        const auto b = bodies::random_body(rng);
        auto f = bodies::features_of(b, n);
        f.at(Keypoint::right_wrist).speed = 20.0 * unit(rng);
        const std::optional<BodyRefs> r = compute_refs(f, std::nullopt, 500.0);
        StrategyParams sp;
        sp.kind = static_cast<StrategyKind>(n % 3);
        const SpeedCalibration cal;
        const RouteInput in{f, r, sp, cal};
        std::vector<MappingSpec> specs(3);
        const FeatureKind kinds[] = {FeatureKind::speed, FeatureKind::pos_u, FeatureKind::pos_v};
        for (int k = 0; k < 3; ++k) {
            specs[k].id = "m" + std::to_string(k);
            specs[k].source = {Keypoint::right_wrist, kinds[k], std::nullopt};
            specs[k].function = k == 0 ? MappingFn{ExpDb{}} : MappingFn{Linear{}};
            specs[k].out_address = "/m" + std::to_string(k);
            specs[k].lo = -50.0 * unit(rng);
            specs[k].hi = specs[k].lo + 0.1 + 50.0 * unit(rng);
            specs[k].send_on_invalid = specs[k].lo;
        }
        const auto u1 = route(in, specs);
        const auto u2 = route(in, specs);
        expect(u1 == u2 && u1.size() == 3, "route determinism");
        for (std::size_t k = 0; k < u1.size(); ++k)
            expect(u1[k].value >= specs[k].lo && u1[k].value <= specs[k].hi, "output clamping");
    }

    return {broken.empty(), broken.empty() ? fmt("%d checks across kinematics, body frame, mapping, router/osc", checks)
                                           : "violated: " + broken};
}

} // namespace

int main()
{
    report("similarity_invariance", similarity_invariance);
    report("non_invariance_witness", non_invariance);
    report("weber_property", weber_property);
    report("jnd_reproduction", jnd_reproduction);
    report("octave_law", octave_law);
    report("velocity_oracle", velocity_oracle);
    report("osc_golden_vectors", osc_golden);
    report("replay_determinism", replay_determinism);
    report("latency_budget", latency_budget);
    report("module_invariants", module_invariants);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
