#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "bodyctl/config.hpp"
#include "bodyctl/pipeline.hpp"
#include "bodyctl/pose_wire.hpp"
#include "bodyctl/sinks.hpp"

namespace bodyctl {

/// WebSocket endpoint accepting one client at a time. Text messages are handed to
/// `on_message` on the I/O thread; a second client is closed with a policy-violation code.
class IngestServer
{
public:
    struct Handlers
    {
        std::function<void(std::string)> on_message;
        std::function<void()> on_connect;
        std::function<void()> on_disconnect;
    };

    IngestServer(Endpoint listen, Handlers handlers);
    ~IngestServer();
    IngestServer(const IngestServer&) = delete;
    IngestServer& operator=(const IngestServer&) = delete;

    /// Binds and starts the I/O thread. Throws Error on bind failure. Port 0 picks a free port.
    void start();
    void stop();
    std::uint16_t port() const;

    /// Queues a text message for the active client; dropped when nobody is connected.
    void publish(std::string text);

    std::uint64_t rejected_clients() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

/// Ordered hand-off from the socket reader to the pipeline. Frames are bounded: on overflow
/// the oldest queued frame is discarded. Control messages are never dropped.
class IngestQueue
{
public:
    enum class Kind { frame, control, connect };
    struct Message
    {
        Kind kind = Kind::frame;
        PoseFrame frame;
        std::string text;
    };

    explicit IngestQueue(std::size_t frame_capacity) : capacity_(std::max<std::size_t>(frame_capacity, 1)) {}

    void push_frame(PoseFrame frame);
    void push(Message m);

    /// Waits up to `timeout`; empty on timeout or after close().
    std::optional<Message> pop_for(std::chrono::milliseconds timeout);
    void close();

    std::uint64_t drops() const;
    std::size_t size() const;

private:
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Message> items_;
    std::size_t frames_ = 0;
    std::uint64_t drops_ = 0;
    bool closed_ = false;
};

struct EngineStats
{
    std::uint64_t frames_received = 0;
    std::uint64_t frames_processed = 0;
    std::uint64_t updates_routed = 0;
    std::uint64_t telemetry_sent = 0;
    std::uint64_t ticks = 0;
    TransportCounters transport;
};

/// The live engine: socket reader -> bounded frame queue -> pipeline thread -> async sender.
class Engine
{
public:
    Engine(EngineConfig config, UpdateSink& sink, std::optional<std::filesystem::path> record = std::nullopt);
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    void start();
    void stop();
    std::uint16_t port() const { return server_.port(); }
    EngineStats stats() const;

    /// Most recent telemetry snapshot.
    Telemetry snapshot() const;

private:
    void on_message(std::string text);
    void pipeline_loop();
    void publish_telemetry();
    TransportCounters counters() const;

    EngineConfig config_;
    UpdateSink& sink_;
    AsyncSender sender_;
    Pipeline pipeline_;
    std::optional<std::ofstream> record_file_;
    std::optional<SessionRecorder> recorder_;
    IngestQueue queue_;
    IngestServer server_;
    std::thread worker_;
    std::atomic<bool> running_{false};

    std::atomic<std::uint64_t> received_{0};
    std::atomic<std::uint64_t> processed_{0};
    std::atomic<std::uint64_t> routed_{0};
    std::atomic<std::uint64_t> telemetry_sent_{0};
    std::atomic<std::uint64_t> ticks_{0};
    std::atomic<std::uint64_t> bad_records_{0};
    mutable std::mutex snapshot_mu_;
    Telemetry snapshot_;
};

} // namespace bodyctl
