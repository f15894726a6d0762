#include "bodyctl/live.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "bodyctl/error.hpp"

namespace bodyctl {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kOutboxLimit = 64;
constexpr auto kIdleAfter = std::chrono::milliseconds(250);
constexpr auto kIdleTick = std::chrono::milliseconds(100);

class Session;

} // namespace

struct IngestServer::Impl
{
    Impl(Endpoint ep, Handlers h) : listen(std::move(ep)), handlers(std::move(h)) {}

    void do_accept();

    Endpoint listen;
    Handlers handlers;
    net::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::shared_ptr<Session> active;
    std::thread thread;
    std::atomic<std::uint16_t> port{0};
    std::atomic<std::uint64_t> rejected{0};
    bool started = false;
};

namespace {

class Session : public std::enable_shared_from_this<Session>
{
public:
    Session(tcp::socket socket, IngestServer::Impl& server) : ws_(std::move(socket)), server_(server) {}

    void start()
    {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(beast::bind_front_handler(&Session::on_accept, shared_from_this()));
    }

    void send(std::shared_ptr<const std::string> text)
    {
        if (outbox_.size() >= kOutboxLimit) {
            // the front entry may be mid-write; drop the oldest waiting one
            outbox_.erase(outbox_.begin() + 1);
        }
        outbox_.push_back(std::move(text));
        if (outbox_.size() == 1) do_write();
    }

    void shutdown()
    {
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
        beast::get_lowest_layer(ws_).socket().close(ec);
    }

private:
    void on_accept(beast::error_code ec)
    {
        if (ec) return;
        if (server_.active) {
            ++server_.rejected;
            ws_.async_close(websocket::close_reason(websocket::close_code::policy_error,
                                                    "engine busy: one performer at a time"),
                            [self = shared_from_this()](beast::error_code) {});
            return;
        }
        server_.active = shared_from_this();
        ws_.text(true);
        if (server_.handlers.on_connect) server_.handlers.on_connect();
        do_read();
    }

    void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&Session::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t)
    {
        if (ec) {
            finish();
            return;
        }
        if (ws_.got_text() && server_.handlers.on_message)
            server_.handlers.on_message(beast::buffers_to_string(buffer_.data()));
        buffer_.consume(buffer_.size());
        do_read();
    }

    void do_write()
    {
        ws_.async_write(net::buffer(*outbox_.front()), beast::bind_front_handler(&Session::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t)
    {
        if (ec) {
            outbox_.clear();
            return;
        }
        outbox_.pop_front();
        if (!outbox_.empty()) do_write();
    }

    void finish()
    {
        if (server_.active.get() != this) return;
        server_.active.reset();
        if (server_.handlers.on_disconnect) server_.handlers.on_disconnect();
    }

    websocket::stream<beast::tcp_stream> ws_;
    IngestServer::Impl& server_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<const std::string>> outbox_;
};

} // namespace

void IngestServer::Impl::do_accept()
{
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (ec) return; // acceptor closed
        std::make_shared<Session>(std::move(socket), *this)->start();
        do_accept();
    });
}

IngestServer::IngestServer(Endpoint listen, Handlers handlers)
    : impl_(std::make_unique<Impl>(std::move(listen), std::move(handlers)))
{
}

IngestServer::~IngestServer() { stop(); }

void IngestServer::start()
{
    auto& s = *impl_;
    if (s.started) return;
    beast::error_code ec;
    tcp::resolver resolver(s.ioc);
    const auto results = resolver.resolve(s.listen.host, std::to_string(s.listen.port), ec);
    if (ec || results.empty()) throw Error("cannot resolve listen host '" + s.listen.host + "': " + ec.message());
    const tcp::endpoint ep = results.begin()->endpoint();
    s.acceptor.open(ep.protocol(), ec);
    if (!ec) s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) s.acceptor.bind(ep, ec);
    if (!ec) s.acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
        throw Error("cannot listen on " + s.listen.host + ":" + std::to_string(s.listen.port) + ": " + ec.message());
    }
    s.port = s.acceptor.local_endpoint().port();
    s.do_accept();
    s.started = true;
    s.thread = std::thread([&s] { s.ioc.run(); });
}

void IngestServer::stop()
{
    auto& s = *impl_;
    if (!s.started) return;
    net::post(s.ioc, [&s] {
        beast::error_code ec;
        s.acceptor.close(ec);
        if (s.active) s.active->shutdown();
    });
    s.ioc.stop();
    if (s.thread.joinable()) s.thread.join();
    s.active.reset();
    s.started = false;
}

std::uint16_t IngestServer::port() const { return impl_->port.load(); }

std::uint64_t IngestServer::rejected_clients() const { return impl_->rejected.load(); }

void IngestServer::publish(std::string text)
{
    auto msg = std::make_shared<const std::string>(std::move(text));
    net::post(impl_->ioc, [this, msg] {
        if (impl_->active) impl_->active->send(msg);
    });
}

void IngestQueue::push_frame(PoseFrame frame)
{
    Message m;
    m.kind = Kind::frame;
    m.frame = std::move(frame);
    push(std::move(m));
}

void IngestQueue::push(Message m)
{
    {
        std::lock_guard lock(mu_);
        if (m.kind == Kind::frame) {
            if (frames_ >= capacity_) {
                const auto oldest = std::find_if(items_.begin(), items_.end(),
                                                 [](const Message& q) { return q.kind == Kind::frame; });
                items_.erase(oldest);
                --frames_;
                ++drops_;
            }
            ++frames_;
        }
        items_.push_back(std::move(m));
    }
    cv_.notify_one();
}

std::optional<IngestQueue::Message> IngestQueue::pop_for(std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; })) return std::nullopt;
    if (items_.empty()) return std::nullopt;
    Message m = std::move(items_.front());
    items_.pop_front();
    if (m.kind == Kind::frame) --frames_;
    return m;
}

void IngestQueue::close()
{
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

std::uint64_t IngestQueue::drops() const
{
    std::lock_guard lock(mu_);
    return drops_;
}

std::size_t IngestQueue::size() const
{
    std::lock_guard lock(mu_);
    return items_.size();
}

Engine::Engine(EngineConfig config, UpdateSink& sink, std::optional<std::filesystem::path> record)
    : config_(std::move(config)),
      sink_(sink),
      sender_(sink_),
      pipeline_(config_),
      queue_(config_.ingest_queue),
      server_(config_.listen, IngestServer::Handlers{
                                  [this](std::string text) { on_message(std::move(text)); },
                                  [this] { queue_.push({IngestQueue::Kind::connect, {}, {}}); },
                                  {},
                              })
{
    if (record) {
        record_file_.emplace(*record, std::ios::app);
        if (!*record_file_) throw Error("cannot open session file '" + record->string() + "'");
        recorder_.emplace(*record_file_);
    }
    snapshot_ = pipeline_.telemetry();
}

Engine::~Engine() { stop(); }

void Engine::start()
{
    if (running_.exchange(true)) return;
    server_.start();
    worker_ = std::thread([this] { pipeline_loop(); });
}

void Engine::stop()
{
    if (!running_.exchange(false)) return;
    server_.stop();
    queue_.close();
    if (worker_.joinable()) worker_.join();
    sender_.flush();
    sender_.stop();
}

void Engine::on_message(std::string text)
{
    if (text.find("\"cmd\"") != std::string::npos) {
        queue_.push({IngestQueue::Kind::control, {}, std::move(text)});
        return;
    }
    PoseFrame frame;
    try {
        frame = parse_frame(text);
    } catch (const ParseError&) {
        ++bad_records_;
        return;
    }
    ++received_;
    if (recorder_) {
        try {
            recorder_->write(frame);
        } catch (const Error&) {
            ++bad_records_;
        }
    }
    queue_.push_frame(std::move(frame));
}

TransportCounters Engine::counters() const
{
    TransportCounters c;
    c.frames_dropped = queue_.drops();
    c.bad_records = bad_records_.load();
    c.updates_dropped = sender_.drops();
    c.send_errors = sink_.errors() + sender_.send_failures();
    return c;
}

void Engine::publish_telemetry()
{
    Telemetry t = pipeline_.telemetry(counters());
    server_.publish(telemetry_json(t));
    ++telemetry_sent_;
    std::lock_guard lock(snapshot_mu_);
    snapshot_ = std::move(t);
}

void Engine::pipeline_loop()
{
    using clock = std::chrono::steady_clock;
    const auto telemetry_period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / config_.telemetry_rate));
    auto last_telemetry = clock::now() - telemetry_period;
    auto last_activity = clock::now();
    double last_frame_t = 0.0;
    double offset = 0.0;    // added to client timestamps so the stream stays monotonic
    bool rebase = false;    // set after a reconnect or idle ticks
    bool dirty = false;
    bool ticking = false;

    auto emit = [&](std::vector<ParamUpdate> updates) {
        routed_ += updates.size();
        sender_.push(updates);
        dirty = true;
    };

    while (running_.load()) {
        const auto msg = queue_.pop_for(std::chrono::milliseconds(20));
        const auto now = clock::now();
        if (msg) {
            switch (msg->kind) {
            case IngestQueue::Kind::connect:
                rebase = true;
                break;
            case IngestQueue::Kind::control:
                server_.publish(pipeline_.handle_control(msg->text));
                publish_telemetry();
                last_telemetry = now;
                break;
            case IngestQueue::Kind::frame: {
                PoseFrame frame = msg->frame;
                const auto last_t = pipeline_.last_t();
                if (rebase && last_t && frame.t + offset <= *last_t) offset = *last_t + 1.0 - frame.t;
                rebase = false;
                frame.t += offset;
                try {
                    emit(pipeline_.process(frame));
                    ++processed_;
                    last_frame_t = frame.t;
                    last_activity = now;
                    ticking = false;
                } catch (const TimestampError&) {
                    // counted by the pipeline
                }
                break;
            }
            }
        }

        const auto last_t = pipeline_.last_t();
        if (last_t && now - last_activity >= (ticking ? kIdleTick : kIdleAfter)) {
            const double elapsed_ms = std::chrono::duration<double, std::milli>(now - last_activity).count();
            const double t = std::max(last_frame_t + elapsed_ms, *last_t + 1.0);
            emit(pipeline_.tick(t));
            ++ticks_;
            last_frame_t = t;
            last_activity = now;
            ticking = true;
            rebase = true;
        }

        if (auto ev = pipeline_.take_event()) server_.publish(std::move(*ev));
        if (dirty && now - last_telemetry >= telemetry_period) {
            publish_telemetry();
            last_telemetry = now;
            dirty = false;
        }
    }
}

EngineStats Engine::stats() const
{
    EngineStats s;
    s.frames_received = received_.load();
    s.frames_processed = processed_.load();
    s.updates_routed = routed_.load();
    s.telemetry_sent = telemetry_sent_.load();
    s.ticks = ticks_.load();
    s.transport = counters();
    return s;
}

Telemetry Engine::snapshot() const
{
    std::lock_guard lock(snapshot_mu_);
    return snapshot_;
}

} // namespace bodyctl
