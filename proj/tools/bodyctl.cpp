#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bodyctl/config.hpp"
#include "bodyctl/error.hpp"
#include "bodyctl/live.hpp"
#include "bodyctl/mapping.hpp"
#include "bodyctl/pose_wire.hpp"
#include "bodyctl/replay.hpp"
#include "bodyctl/sinks.hpp"

using namespace bodyctl;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void wait_for_interrupt()
{
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items)
{
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error("bad parameter '" + item + "', expected name=value");
        try {
            std::size_t used = 0;
            const std::string value = item.substr(eq + 1);
            out[item.substr(0, eq)] = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::logic_error&) {
            throw Error("bad parameter value in '" + item + "'");
        }
    }
    return out;
}

int cmd_run(const std::string& config_path, const std::string& record)
{
    const EngineConfig cfg = load_config(config_path);
    UdpSender udp(cfg.osc_out);
    if (!udp.ready()) std::cerr << "warning: " << udp.last_error() << "; updates will be counted as send errors\n";
    Engine engine(cfg, udp, record.empty() ? std::nullopt : std::optional<std::filesystem::path>(record));
    engine.start();
    std::cerr << "listening on " << cfg.listen.host << ':' << engine.port() << ", OSC to " << cfg.osc_out.host << ':'
              << cfg.osc_out.port << '\n';
    wait_for_interrupt();
    engine.stop();
    const auto s = engine.stats();
    std::cerr << "frames received " << s.frames_received << ", processed " << s.frames_processed << ", dropped "
              << s.transport.frames_dropped << ", updates " << s.updates_routed << ", send errors "
              << s.transport.send_errors << '\n';
    return 0;
}

int cmd_replay(const std::string& config_path, const std::string& input, const std::string& sink_sel, bool fast)
{
    const EngineConfig cfg = load_config(config_path);
    std::ifstream in(input);
    if (!in) throw Error("cannot open session '" + input + "'");
    auto sink = make_sink(sink_sel, cfg.osc_out);
    const auto stats = replay(cfg, in, *sink, fast ? ReplayMode::fast : ReplayMode::realtime);
    std::cerr << "frames " << stats.frames << ", updates " << stats.updates << ", rejected " << stats.rejected
              << ", median frame time " << stats.median_micros() << " us";
    if (sink->errors() > 0) std::cerr << ", send errors " << sink->errors();
    std::cerr << '\n';
    return 0;
}

int cmd_record(const std::string& listen, const std::string& output)
{
    std::ofstream out(output, std::ios::app);
    if (!out) throw Error("cannot open '" + output + "'");
    SessionRecorder recorder(out);
    std::mutex mu;
    std::uint64_t bad = 0;
    IngestServer server(parse_endpoint(listen, "0.0.0.0"), {[&](std::string text) {
                                                                 std::lock_guard lock(mu);
                                                                 try {
                                                                     recorder.write(parse_frame(text));
                                                                 } catch (const ParseError&) {
                                                                     ++bad;
                                                                 }
                                                             },
                                                             {},
                                                             {}});
    server.start();
    std::cerr << "recording to " << output << ", listening on port " << server.port() << '\n';
    wait_for_interrupt();
    server.stop();
    std::lock_guard lock(mu);
    std::cerr << "frames written " << recorder.result().written << ", regressions rejected "
              << recorder.result().regressions << ", bad records " << bad << '\n';
    return 0;
}

int cmd_analyze(const std::string& kind, const std::string& function, const std::vector<std::string>& params,
                double w_in, double l_jnd, std::size_t grid)
{
    const MappingFn fn = make_function(function, parse_params(params));
    if (kind == "curve") {
        write_curve_csv(std::cout, fn, grid);
    } else {
        write_jnd_csv(std::cout, jnd_analyze(fn, JndOptions{w_in, l_jnd, grid}));
    }
    return 0;
}

int cmd_calibrate(const std::string& input, double percentile, const std::string& config_path)
{
    // without a config the wrists and ankles are sampled
    const EngineConfig cfg = config_path.empty() ? EngineConfig{} : load_config(config_path);
    std::ifstream in(input);
    if (!in) throw Error("cannot open session '" + input + "'");
    const auto frames = read_session(in);
    const auto speeds = session_body_speeds(cfg, frames);
    const auto cal = calibrate(speeds, percentile);
    std::cout << "s_max," << format_number(cal.s_max) << '\n';
    std::cerr << speeds.size() << " samples, percentile " << percentile << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Body-movement to OSC control engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::string record_path;
    auto* run = app.add_subcommand("run", "Serve the live ingest endpoint and route frames to OSC");
    run->add_option("--config", config_path, "Engine configuration (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--record", record_path, "Append received frames to this session file");

    std::string input;
    std::string sink_sel = "udp";
    bool fast = false;
    auto* rep = app.add_subcommand("replay", "Run the pipeline over a recorded session");
    rep->add_option("--config", config_path, "Engine configuration (JSON)")->required()->check(CLI::ExistingFile);
    rep->add_option("--input", input, "Session file (.jsonl)")->required()->check(CLI::ExistingFile);
    rep->add_option("--sink", sink_sel, "udp | capture:<file> | csv:<file>");
    rep->add_flag("--fast", fast, "Emit without honoring frame timing");

    std::string listen = "0.0.0.0:9000";
    std::string output;
    auto* rec = app.add_subcommand("record", "Record incoming frames to a session file");
    rec->add_option("--listen", listen, "host:port to listen on");
    rec->add_option("--output", output, "Session file (.jsonl)")->required();

    std::string kind;
    std::string function = "exp_db";
    std::vector<std::string> params;
    double w_in = 0.1;
    double l_jnd = 1.0;
    std::size_t grid = 200;
    auto* ana = app.add_subcommand("analyze", "Print a mapping curve or JND report as CSV");
    ana->add_option("kind", kind, "jnd | curve")->required()->check(CLI::IsMember({"jnd", "curve"}));
    ana->add_option("--function", function, "linear | exp_db | exp_norm | pitch_exp");
    ana->add_option("--params", params, "name=value pairs, comma separated")->delimiter(',');
    ana->add_option("--w-in", w_in, "Input Weber fraction");
    ana->add_option("--l-jnd", l_jnd, "Output JND in dB");
    ana->add_option("--grid", grid, "Grid size")->check(CLI::PositiveNumber);

    double percentile = 95.0;
    auto* cal = app.add_subcommand("calibrate", "Derive full-scale speed from a recorded session");
    cal->add_option("--input", input, "Session file (.jsonl)")->required()->check(CLI::ExistingFile);
    cal->add_option("--percentile", percentile, "Nearest-rank percentile")->check(CLI::Range(0.0, 100.0));
    cal->add_option("--config", config_path, "Use this configuration's speed mappings");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, record_path);
        if (*rep) return cmd_replay(config_path, input, sink_sel, fast);
        if (*rec) return cmd_record(listen, output);
        if (*ana) return cmd_analyze(kind, function, params, w_in, l_jnd, grid);
        if (*cal) return cmd_calibrate(input, percentile, config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
