#include "bodyctl/sinks.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <vector>

#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include "bodyctl/error.hpp"
#include "bodyctl/pose_wire.hpp"

namespace bodyctl {

Endpoint parse_endpoint(std::string_view text, std::string_view default_host)
{
    Endpoint ep;
    std::string_view port_text = text;
    if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
        ep.host = std::string(text.substr(0, colon));
        port_text = text.substr(colon + 1);
    }
    if (ep.host.empty()) ep.host = default_host;
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || value > 65535)
        throw ConfigError("", "bad endpoint '" + std::string(text) + "', expected host:port");
    ep.port = static_cast<std::uint16_t>(value);
    return ep;
}

UdpSender::UdpSender(const Endpoint& destination)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_DGRAM;
    hints.ai_flags = AI_NUMERICSERV;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(destination.port);
    if (const int rc = getaddrinfo(destination.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        last_error_ = "cannot resolve " + destination.host + ": " + gai_strerror(rc);
        return;
    }
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd_ < 0) continue;
        const auto* bytes = reinterpret_cast<const std::uint8_t*>(ai->ai_addr);
        addr_.assign(bytes, bytes + ai->ai_addrlen);
        break;
    }
    freeaddrinfo(res);
    if (fd_ < 0) last_error_ = std::string("socket: ") + std::strerror(errno);
}

UdpSender::~UdpSender()
{
    if (fd_ >= 0) ::close(fd_);
}

std::size_t UdpSender::send(std::span<const ParamUpdate> updates)
{
    std::size_t sent = 0;
    for (const auto& u : updates) {
        if (fd_ < 0) {
            ++errors_;
            continue;
        }
        const Bytes datagram = encode_osc(u);
        const auto n = ::sendto(fd_, datagram.data(), datagram.size(), MSG_DONTWAIT,
                                reinterpret_cast<const sockaddr*>(addr_.data()),
                                static_cast<socklen_t>(addr_.size()));
        if (n == static_cast<ssize_t>(datagram.size())) {
            ++sent;
        } else {
            ++errors_;
        }
    }
    return sent;
}

CaptureFileSink::CaptureFileSink(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc)
{
    if (!out_) throw Error("cannot open capture file '" + path + "'");
}

std::size_t CaptureFileSink::send(std::span<const ParamUpdate> updates)
{
    for (const auto& u : updates) write_capture_record(out_, encode_osc(u));
    out_.flush();
    if (!out_) throw Error("capture file write failed");
    return updates.size();
}

CsvSink::CsvSink(const std::string& path) : out_(path, std::ios::trunc)
{
    if (!out_) throw Error("cannot open csv file '" + path + "'");
    out_ << "t_ms,address,value\n";
}

std::size_t CsvSink::send(std::span<const ParamUpdate> updates)
{
    for (const auto& u : updates) out_ << format_number(u.t) << ',' << u.address << ',' << format_number(u.value) << '\n';
    out_.flush();
    if (!out_) throw Error("csv file write failed");
    return updates.size();
}

std::unique_ptr<UpdateSink> make_sink(std::string_view selector, const Endpoint& osc_out)
{
    if (selector == "udp") return std::make_unique<UdpSender>(osc_out);
    if (selector.starts_with("capture:")) return std::make_unique<CaptureFileSink>(std::string(selector.substr(8)));
    if (selector.starts_with("csv:")) return std::make_unique<CsvSink>(std::string(selector.substr(4)));
    throw Error("unknown sink '" + std::string(selector) + "', expected udp | capture:<file> | csv:<file>");
}

AsyncSender::AsyncSender(UpdateSink& sink, std::size_t capacity)
    : sink_(sink), capacity_(std::max<std::size_t>(capacity, 1)), worker_([this] { run(); })
{
}

AsyncSender::~AsyncSender() { stop(); }

void AsyncSender::push(std::span<const ParamUpdate> updates)
{
    {
        std::lock_guard lock(mu_);
        for (const auto& u : updates) {
            if (queue_.size() >= capacity_) {
                auto same = std::find_if(queue_.begin(), queue_.end(),
                                         [&](const ParamUpdate& q) { return q.address == u.address; });
                queue_.erase(same != queue_.end() ? same : queue_.begin());
                ++drops_;
            }
            queue_.push_back(u);
        }
    }
    cv_.notify_one();
}

void AsyncSender::flush()
{
    std::unique_lock lock(mu_);
    idle_cv_.wait(lock, [&] { return (queue_.empty() && !busy_) || stopping_; });
}

void AsyncSender::stop()
{
    {
        std::lock_guard lock(mu_);
        if (stopping_) return;
        stopping_ = true;
    }
    cv_.notify_all();
    idle_cv_.notify_all();
    if (worker_.joinable()) worker_.join();
}

void AsyncSender::run()
{
    std::unique_lock lock(mu_);
    while (true) {
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (queue_.empty() && stopping_) break;
        std::vector<ParamUpdate> batch(queue_.begin(), queue_.end());
        queue_.clear();
        busy_ = true;
        lock.unlock();
        try {
            sent_ += sink_.send(batch);
        } catch (const std::exception&) {
            send_failures_ += batch.size();
        }
        lock.lock();
        busy_ = false;
        idle_cv_.notify_all();
    }
    busy_ = false;
    idle_cv_.notify_all();
}

} // namespace bodyctl
