#include <cmath>
#include <fstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "bodyctl/config.hpp"
#include "bodyctl/error.hpp"
#include "bodyctl/pipeline.hpp"
#include "bodyctl/pose_wire.hpp"

using namespace bodyctl;
using nlohmann::json;

namespace {

EngineConfig example_config() { return load_config(std::string(BODYCTL_CONFIG_DIR) + "/example.json"); }

// Static upright performer; the right wrist moves by dx per frame.
PoseFrame pose(double t, double right_wrist_x, double c = 0.9)
{
    PoseFrame f(t);
    f.add({Keypoint::left_shoulder, 0.40, 0.40, 0.9});
    f.add({Keypoint::right_shoulder, 0.60, 0.40, 0.9});
    f.add({Keypoint::left_hip, 0.42, 0.70, 0.9});
    f.add({Keypoint::right_hip, 0.58, 0.70, 0.9});
    f.add({Keypoint::left_wrist, 0.35, 0.40, 0.9});
    f.add({Keypoint::right_wrist, right_wrist_x, 0.40, c});
    return f;
}

std::optional<double> value_of(const std::vector<ParamUpdate>& updates, const std::string& address)
{
    for (const auto& u : updates) {
        if (u.address == address) return u.value;
    }
    return std::nullopt;
}

} // namespace

TEST_CASE("one update per mapping per frame, in order")
{
    Pipeline p(example_config());
    const auto u = p.process(pose(0.0, 0.65));
    REQUIRE(u.size() == 4);
    CHECK(u[0].address == "/right/amp");
    CHECK(u[1].address == "/right/pitch");
    CHECK(u[2].address == "/left/amp");
    CHECK(u[3].address == "/left/cutoff");
    CHECK(u[0].value == 0.0); // first frame: zero velocity, gated
    CHECK(u[1].value > 220.0);
    CHECK(u[1].value < 880.0);
}

TEST_CASE("missing right wrist decays to send_on_invalid")
{
    Pipeline p(example_config());
    double x = 0.62;
    for (int i = 0; i < 30; ++i) {
        x += 0.01;
        p.process(pose(i * 33.0, x));
    }
    CHECK(*value_of(p.process(pose(30 * 33.0, x + 0.01)), "/right/amp") > 0.0);
    // low-confidence detections count as missing; after t_hold the source is invalid
    std::vector<ParamUpdate> last;
    for (int i = 31; i < 45; ++i) last = p.process(pose(i * 33.0, x, 0.1));
    CHECK(value_of(last, "/right/amp") == 0.0);
    CHECK_FALSE(value_of(last, "/right/pitch"));
    const auto tel = p.telemetry();
    CHECK_FALSE(tel.points[index_of(Keypoint::right_wrist)].valid);
    CHECK(tel.points[index_of(Keypoint::left_wrist)].valid);
}

TEST_CASE("ticks without frames invalidate every point")
{
    Pipeline p(example_config());
    p.process(pose(0.0, 0.65));
    std::vector<ParamUpdate> u;
    for (int i = 1; i <= 5; ++i) u = p.tick(i * 100.0);
    CHECK(value_of(u, "/right/amp") == 0.0);
    CHECK(value_of(u, "/left/amp") == 0.0);
    CHECK(value_of(u, "/left/cutoff") == 200.0);
    CHECK_FALSE(value_of(u, "/right/pitch"));
}

TEST_CASE("timestamp regressions are rejected and counted")
{
    Pipeline p(example_config());
    p.process(pose(100.0, 0.65));
    CHECK_THROWS_AS(p.process(pose(100.0, 0.65)), TimestampError);
    CHECK_THROWS_AS(p.process(pose(50.0, 0.65)), TimestampError);
    CHECK(p.telemetry().frames_rejected == 2);
    CHECK_NOTHROW(p.process(pose(133.0, 0.65)));
}

TEST_CASE("telemetry JSON")
{
    Pipeline p(example_config());
    for (int i = 0; i < 60; ++i) p.process(pose(i * 1000.0 / 30.0, 0.65));
    const auto j = json::parse(telemetry_json(p.telemetry({3, 1, 2, 4})));
    CHECK(j["t"].get<double>() == doctest::Approx(59 * 1000.0 / 30.0));
    CHECK(j["strategy"] == "body_scaled");
    CHECK(j["points"].size() == 17);
    CHECK(j["points"]["right_wrist"]["valid"] == true);
    CHECK(j["points"]["right_wrist"]["u"].get<double>() == doctest::Approx((0.05 / 0.2 + 1.5) / 3.5));
    CHECK(j["points"]["nose"]["valid"] == false);
    CHECK_FALSE(j["points"]["nose"].contains("u"));
    CHECK(j["outputs"].size() == 4);
    CHECK(j["outputs"]["right_amp"] == 0.0);
    CHECK(j["fps"].get<double>() == doctest::Approx(30.0).epsilon(0.05));
    CHECK(j["drops"]["frames"] == 3);
    CHECK(j["drops"]["updates"] == 2);
    CHECK(j["bad_records"] == 1);
    CHECK(j["send_errors"] == 4);
    CHECK(j["preset"] == "default");
    CHECK(j["calibration"] == "idle");
}

TEST_CASE("control records")
{
    Pipeline p(example_config());
    auto ack = json::parse(p.handle_control(R"({"cmd":"set_strategy","strategy":"camera_center"})"));
    CHECK(ack["ok"] == true);
    CHECK(p.telemetry().strategy == StrategyKind::camera_center);

    ack = json::parse(p.handle_control(R"({"cmd":"set_strategy","strategy":"waist"})"));
    CHECK(ack["ok"] == false);
    CHECK(ack["ack"] == "set_strategy");
    CHECK(ack["error"].get<std::string>().find("waist") != std::string::npos);

    ack = json::parse(p.handle_control(R"({"cmd":"set_threshold","value":0.5})"));
    CHECK(ack["ok"] == true);
    CHECK(p.config().smoother.c_min == 0.5);
    CHECK(json::parse(p.handle_control(R"({"cmd":"set_threshold","value":1.5})"))["ok"] == false);

    ack = json::parse(p.handle_control(R"({"cmd":"select_preset","preset":"feet"})"));
    CHECK(ack["ok"] == true);
    CHECK(p.active_mappings().size() == 2);
    const auto u = p.process(pose(0.0, 0.65));
    REQUIRE(u.size() == 2);
    CHECK(u[0].address == "/feet/amp");
    CHECK(json::parse(p.handle_control(R"({"cmd":"select_preset","preset":"nope"})"))["ok"] == false);
    CHECK(json::parse(p.handle_control(R"({"cmd":"select_preset","preset":"default"})"))["ok"] == true);
    CHECK(p.active_mappings().size() == 4);

    CHECK(json::parse(p.handle_control(R"({"cmd":"dance"})"))["ok"] == false);
    CHECK(json::parse(p.handle_control(R"({"nocmd":1})"))["ok"] == false);
    CHECK(json::parse(p.handle_control("garbage"))["ok"] == false);
}

TEST_CASE("calibration sets s_max from the recorded speeds")
{
    Pipeline p(example_config());
    CHECK(json::parse(p.handle_control(R"({"cmd":"start_calibration","duration_ms":2000})"))["ok"] == true);
    CHECK(p.telemetry().calibration == "sampling");
    // right wrist oscillates: speed in body lengths/s varies over the window
    std::optional<std::string> event;
    for (int i = 0; i <= 90 && !event; ++i) {
        const double t = i * 1000.0 / 30.0;
        p.process(pose(t, 0.7 + 0.1 * std::sin(t / 200.0)));
        event = p.take_event();
    }
    REQUIRE(event);
    const auto ev = json::parse(*event);
    CHECK(ev["event"] == "calibration");
    CHECK(ev["ok"] == true);
    CHECK(ev["samples"].get<int>() >= 60);
    CHECK(ev["s_max"].get<double>() > 0.0);
    CHECK(p.telemetry().s_max == ev["s_max"].get<double>());
    CHECK(p.telemetry().calibration == "done");
    CHECK_FALSE(p.take_event());
}

TEST_CASE("calibration fails cleanly with too few samples")
{
    Pipeline p(example_config());
    p.start_calibration(100.0);
    std::optional<std::string> event;
    for (int i = 0; i < 10 && !event; ++i) {
        p.process(pose(i * 33.0, 0.7));
        event = p.take_event();
    }
    REQUIRE(event);
    CHECK(json::parse(*event)["ok"] == false);
    CHECK(p.telemetry().s_max == 6.0);
    CHECK(p.telemetry().calibration == "failed");
}

TEST_CASE("only_on_change suppresses repeats")
{
    auto cfg = example_config();
    cfg.only_on_change.enabled = true;
    Pipeline p(cfg);
    CHECK(p.process(pose(0.0, 0.65)).size() == 4);
    CHECK(p.process(pose(33.0, 0.65)).empty());
    const auto moved = p.process(pose(66.0, 0.70));
    CHECK(value_of(moved, "/right/pitch"));
    CHECK_FALSE(value_of(moved, "/left/cutoff"));
}

TEST_CASE("calibration_points")
{
    const auto cfg = example_config();
    CHECK(calibration_points(cfg.mappings) == std::vector<Keypoint>{Keypoint::left_wrist, Keypoint::right_wrist});
    CHECK(calibration_points({}).size() == 4);
}
