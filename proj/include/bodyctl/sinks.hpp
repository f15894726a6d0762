#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>

#include "bodyctl/router.hpp"

namespace bodyctl {

struct Endpoint
{
    std::string host;
    std::uint16_t port = 0;
};

/// "host:port"; a bare ":port" or "port" binds/points at the given default host.
/// Throws ConfigError.
Endpoint parse_endpoint(std::string_view text, std::string_view default_host = "127.0.0.1");

class UpdateSink
{
public:
    virtual ~UpdateSink() = default;

    /// Returns how many updates were delivered.
    virtual std::size_t send(std::span<const ParamUpdate> updates) = 0;
    virtual std::uint64_t errors() const { return 0; }
};

/// One UDP datagram per update. Failures are counted, never thrown.
class UdpSender final : public UpdateSink
{
public:
    explicit UdpSender(const Endpoint& destination);
    ~UdpSender() override;
    UdpSender(const UdpSender&) = delete;
    UdpSender& operator=(const UdpSender&) = delete;

    std::size_t send(std::span<const ParamUpdate> updates) override;
    std::uint64_t errors() const override { return errors_.load(); }

    /// False when the destination did not resolve or the socket could not be opened.
    bool ready() const { return fd_ >= 0; }
    const std::string& last_error() const { return last_error_; }

private:
    int fd_ = -1;
    std::vector<std::uint8_t> addr_;
    std::atomic<std::uint64_t> errors_{0};
    std::string last_error_;
};

/// Raw datagrams, each prefixed by its u32 big-endian length.
class CaptureFileSink final : public UpdateSink
{
public:
    explicit CaptureFileSink(const std::string& path);
    std::size_t send(std::span<const ParamUpdate> updates) override;

private:
    std::ofstream out_;
};

/// CSV rows t_ms,address,value.
class CsvSink final : public UpdateSink
{
public:
    explicit CsvSink(const std::string& path);
    std::size_t send(std::span<const ParamUpdate> updates) override;

private:
    std::ofstream out_;
};

/// Parses "udp", "capture:<file>" or "csv:<file>". UDP uses `osc_out`.
std::unique_ptr<UpdateSink> make_sink(std::string_view selector, const Endpoint& osc_out);

/// Drains a bounded queue into a sink on its own thread. When full, the oldest queued update
/// for the same address is dropped first, else the oldest overall.
class AsyncSender
{
public:
    AsyncSender(UpdateSink& sink, std::size_t capacity = 256);
    ~AsyncSender();
    AsyncSender(const AsyncSender&) = delete;
    AsyncSender& operator=(const AsyncSender&) = delete;

    /// Never blocks on the sink.
    void push(std::span<const ParamUpdate> updates);

    /// Waits until everything queued so far has been handed to the sink.
    void flush();
    void stop();

    std::uint64_t drops() const { return drops_.load(); }
    std::uint64_t sent() const { return sent_.load(); }
    /// Updates lost because the sink threw.
    std::uint64_t send_failures() const { return send_failures_.load(); }

private:
    void run();

    UpdateSink& sink_;
    std::size_t capacity_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<ParamUpdate> queue_;
    bool busy_ = false;
    bool stopping_ = false;
    std::atomic<std::uint64_t> drops_{0};
    std::atomic<std::uint64_t> sent_{0};
    std::atomic<std::uint64_t> send_failures_{0};
    std::thread worker_;
};

} // namespace bodyctl
