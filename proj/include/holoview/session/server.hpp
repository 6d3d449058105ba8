#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "holoview/session/session_core.hpp"
#include "json.hpp"

namespace holoview::session {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

struct ServerConfig {
  std::string host = "127.0.0.1";
  unsigned short port = 0;  // 0 picks a free port
  double fps = 30.0;
  double reduction = 3.0;
  int width = 320, height = 240;
  int max_sessions = 8;
  int io_threads = 2;
  std::size_t max_queued_frames = 4;  // per session; rendering pauses beyond this
  std::chrono::milliseconds heartbeat{2000};
  std::filesystem::path static_dir;  // empty: no static files
  std::function<void(const std::string&)> log;
};

/// Hierarchy listing served at /api/hierarchy.
inline nlohmann::json hierarchy_json(const RenderAssets& assets) {
  nlohmann::json organs = nlohmann::json::array();
  for (const auto& e : assets.hierarchy().entries())
    organs.push_back({{"l1", e.organ.l1},
                      {"l2", e.organ.l2},
                      {"name", e.name},
                      {"color", {e.color.r, e.color.g, e.color.b, e.color.a}},
                      {"present", assets.proxy(e.organ) != nullptr}});
  const auto& d = assets.volume().dims();
  return {{"organs", organs}, {"dims", {d.nx, d.ny, d.nz}}};
}

inline std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".wasm") return "application/wasm";
  if (ext == ".map" || ext == ".txt") return "text/plain; charset=utf-8";
  return "application/octet-stream";
}

/// Maps a request target onto a file below `root`; nullopt for anything that
/// would escape it.
inline std::optional<std::filesystem::path> static_path(const std::filesystem::path& root, std::string_view target) {
  if (root.empty()) return std::nullopt;
  target = target.substr(0, target.find_first_of("?#"));
  if (target.empty() || target[0] != '/') return std::nullopt;
  std::filesystem::path rel;
  std::size_t pos = 1;
  while (pos <= target.size()) {
    const std::size_t next = std::min(target.find('/', pos), target.size());
    const std::string_view seg = target.substr(pos, next - pos);
    if (seg == ".." || seg.find('\\') != std::string_view::npos || seg.find('%') != std::string_view::npos ||
        seg.find('\0') != std::string_view::npos)
      return std::nullopt;
    if (!seg.empty() && seg != ".") rel /= std::string(seg);
    pos = next + 1;
  }
  auto full = root / rel;
  if (rel.empty() || target.back() == '/') full /= "index.html";
  return full;
}

class Server;

namespace detail {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Server& server, SessionCore core);
  ~WsSession();

  template <class Request>
  void start(Request req);
  void close();
  void join();

 private:
  void on_accept(beast::error_code ec);
  void read_next();
  void on_read(beast::error_code ec, std::size_t);
  void send(std::string bytes, bool is_frame);
  void write_next();
  void render_loop();
  void finish();

  websocket::stream<beast::tcp_stream> ws_;
  Server& server_;
  beast::flat_buffer buffer_;

  std::mutex mutex_;  // guards core_ and stopping_
  std::condition_variable wake_;
  SessionCore core_;
  bool stopping_ = false;

  // Owned by the websocket strand.
  std::deque<std::pair<std::string, bool>> outbox_;
  bool writing_ = false;

  std::atomic<std::size_t> queued_frames_{0};
  std::atomic<std::int64_t> last_send_ns_{0};
  std::thread renderer_;
  std::atomic<bool> finished_{false};
  std::shared_ptr<std::atomic<int>> active_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Server& server) : stream_(std::move(socket)), server_(server) {}
  void start() { read(); }

 private:
  void read();
  void on_read(beast::error_code ec, std::size_t);
  void respond(http::response<http::string_body> res);

  beast::tcp_stream stream_;
  Server& server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace detail

/// HTTP + websocket front end. Websocket clients connect at /ws; each gets
/// its own SessionCore and render thread.
class Server {
 public:
  Server(std::shared_ptr<const RenderAssets> assets, ServerConfig config)
      : assets_(std::move(assets)), config_(std::move(config)), acceptor_(ioc_) {
    if (!assets_) throw Error(ErrorKind::kPrecondition, "server needs assets");
    if (!(config_.fps > 0.0)) throw Error(ErrorKind::kRange, "fps must be > 0");
    if (config_.max_sessions < 1) throw Error(ErrorKind::kRange, "max_sessions must be >= 1");
    if (config_.io_threads < 1) throw Error(ErrorKind::kRange, "io_threads must be >= 1");
    initial_ = render::default_scene(*assets_, config_.width, config_.height);
    initial_.reduction = config_.reduction;
    initial_.validate();
    foveation::scene_mapping(initial_);
  }

  ~Server() { stop(); }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving. Throws an I/O error if the address is unusable.
  void start() {
    beast::error_code ec;
    const auto address = net::ip::make_address(config_.host, ec);
    if (ec) throw Error(ErrorKind::kIo, "bad bind address '" + config_.host + "'");
    const tcp::endpoint ep(address, config_.port);
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      acceptor_.close();
      throw Error(ErrorKind::kIo, "cannot listen on " + config_.host + ":" + std::to_string(config_.port) + ": " +
                                      ec.message());
    }
    port_ = acceptor_.local_endpoint().port();
    accept();
    for (int i = 0; i < config_.io_threads; ++i) threads_.emplace_back([this] { ioc_.run(); });
    log("listening on " + config_.host + ":" + std::to_string(port_));
  }

  /// Closes the listener and every session, then waits for all workers.
  void stop() {
    {
      std::lock_guard lock(sessions_mutex_);
      if (stopped_.exchange(true)) return;
    }
    net::post(ioc_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
    });
    std::vector<std::shared_ptr<detail::WsSession>> live;
    {
      std::lock_guard lock(sessions_mutex_);
      for (auto& w : sessions_)
        if (auto s = w.lock()) live.push_back(std::move(s));
    }
    for (auto& s : live) s->close();
    for (auto& s : live) s->join();
    live.clear();
    work_guard_.reset();
    ioc_.stop();
    for (auto& t : threads_)
      if (t.joinable()) t.join();
    threads_.clear();
    log("stopped");
  }

  unsigned short port() const { return port_; }
  int active_sessions() const { return active_->load(); }
  const ServerConfig& config() const { return config_; }
  const RenderAssets& assets() const { return *assets_; }

  void log(const std::string& line) const {
    if (config_.log) config_.log(line);
  }

 private:
  friend class detail::WsSession;
  friend class detail::HttpSession;

  void accept() {
    acceptor_.async_accept(net::make_strand(ioc_), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      std::make_shared<detail::HttpSession>(std::move(socket), *this)->start();
      accept();
    });
  }

  bool try_claim_session() {
    int n = active_->load();
    while (n < config_.max_sessions)
      if (active_->compare_exchange_weak(n, n + 1)) return true;
    return false;
  }

  bool register_session(const std::shared_ptr<detail::WsSession>& s) {
    std::lock_guard lock(sessions_mutex_);
    if (stopped_) return false;
    std::erase_if(sessions_, [](const auto& w) { return w.expired(); });
    sessions_.push_back(s);
    return true;
  }

  std::shared_ptr<const RenderAssets> assets_;
  ServerConfig config_;
  SceneState initial_;
  net::io_context ioc_;
  net::executor_work_guard<net::io_context::executor_type> work_guard_{ioc_.get_executor()};
  tcp::acceptor acceptor_;
  std::vector<std::thread> threads_;
  unsigned short port_ = 0;
  std::shared_ptr<std::atomic<int>> active_ = std::make_shared<std::atomic<int>>(0);
  std::atomic<bool> stopped_{false};
  std::mutex sessions_mutex_;
  std::vector<std::weak_ptr<detail::WsSession>> sessions_;
};

namespace detail {

inline std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

inline WsSession::WsSession(tcp::socket socket, Server& server, SessionCore core)
    : ws_(std::move(socket)), server_(server), core_(std::move(core)), active_(server.active_) {}

inline WsSession::~WsSession() {
  if (renderer_.joinable()) {
    if (renderer_.get_id() == std::this_thread::get_id())
      renderer_.detach();
    else
      renderer_.join();
  }
  --*active_;
}

template <class Request>
void WsSession::start(Request req) {
  ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
  ws_.binary(true);
  ws_.read_message_max(kMaxPayload + kWireHeaderSize);
  ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
}

inline void WsSession::on_accept(beast::error_code ec) {
  if (ec || !server_.register_session(shared_from_this())) return finish();
  server_.log("session opened");
  last_send_ns_ = now_ns();
  renderer_ = std::thread([self = shared_from_this()] { self->render_loop(); });
  read_next();
}

inline void WsSession::read_next() {
  ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
}

inline void WsSession::on_read(beast::error_code ec, std::size_t) {
  if (ec) return finish();
  const auto data = buffer_.cdata();
  const std::string_view bytes(static_cast<const char*>(data.data()), data.size());
  std::vector<DataMessage> replies;
  {
    std::lock_guard lock(mutex_);
    replies = core_.handle_bytes(bytes);
  }
  buffer_.consume(buffer_.size());
  wake_.notify_one();
  for (const auto& r : replies) send(serialize(r), false);
  read_next();
}

inline void WsSession::send(std::string bytes, bool is_frame) {
  if (is_frame) ++queued_frames_;
  net::post(ws_.get_executor(), [self = shared_from_this(), bytes = std::move(bytes), is_frame]() mutable {
    self->outbox_.emplace_back(std::move(bytes), is_frame);
    if (!self->writing_) self->write_next();
  });
}

inline void WsSession::write_next() {
  if (outbox_.empty() || finished_) {
    writing_ = false;
    return;
  }
  writing_ = true;
  ws_.async_write(net::buffer(outbox_.front().first),
                  [self = shared_from_this()](beast::error_code ec, std::size_t) {
                    if (self->outbox_.front().second) --self->queued_frames_;
                    self->outbox_.pop_front();
                    self->last_send_ns_ = now_ns();
                    if (ec) {
                      self->writing_ = false;
                      return self->finish();
                    }
                    self->write_next();
                  });
}

inline void WsSession::render_loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / server_.config().fps));
  auto last = clock::now();
  auto next = last;
  for (;;) {
    std::optional<RenderJob> job;
    {
      std::unique_lock lock(mutex_);
      const auto wait = std::chrono::duration_cast<std::chrono::system_clock::duration>(next - clock::now());
      wake_.wait_until(lock, std::chrono::system_clock::now() + wait, [this] { return stopping_; });
      if (stopping_) return;
      const auto now = clock::now();
      if (now < next) continue;
      core_.advance(std::chrono::duration<double>(now - last).count());
      last = now;
      next = now + period;
      if (core_.needs_render() && queued_frames_ < server_.config().max_queued_frames) job = core_.take_job();
    }
    if (job) {
      try {
        for (const auto& f : render_job(core_.assets(), *job)) send(serialize(DataMessage{f}), true);
      } catch (const std::exception& e) {
        send(serialize(DataMessage{ErrorMessage{"render-failed", e.what()}}), false);
      }
    } else if (now_ns() - last_send_ns_.load() >= std::chrono::nanoseconds(server_.config().heartbeat).count()) {
      std::uint64_t id;
      {
        std::lock_guard lock(mutex_);
        id = core_.last_frame_id();
      }
      last_send_ns_ = now_ns();
      send(serialize(DataMessage{Ack{id}}), false);
    }
  }
}

inline void WsSession::finish() {
  if (finished_.exchange(true)) return;
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  server_.log("session closed");
}

inline void WsSession::close() {
  net::post(ws_.get_executor(), [self = shared_from_this()] {
    beast::error_code ec;
    self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ec);
    self->ws_.next_layer().close();
    self->finish();
  });
}

inline void WsSession::join() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (renderer_.joinable() && renderer_.get_id() != std::this_thread::get_id()) renderer_.join();
}

inline void HttpSession::read() {
  req_ = {};
  stream_.expires_after(std::chrono::seconds(30));
  http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
}

inline void HttpSession::on_read(beast::error_code ec, std::size_t) {
  if (ec) return;
  auto make = [this](http::status status, std::string_view type, std::string body) {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::server, "holoview");
    res.set(http::field::content_type, std::string(type));
    res.keep_alive(false);
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  };
  const std::string target(req_.target());
  const std::string path = target.substr(0, target.find('?'));

  if (websocket::is_upgrade(req_)) {
    if (path != "/ws") return respond(make(http::status::not_found, "text/plain", "no websocket endpoint here\n"));
    if (server_.stopped_ || !server_.try_claim_session())
      return respond(make(http::status::service_unavailable, "text/plain", "session limit reached\n"));
    stream_.expires_never();
    SessionCore core(server_.assets_, server_.initial_);
    std::make_shared<WsSession>(stream_.release_socket(), server_, std::move(core))->start(std::move(req_));
    return;
  }
  if (req_.method() != http::verb::get && req_.method() != http::verb::head)
    return respond(make(http::status::method_not_allowed, "text/plain", "GET only\n"));
  if (path == "/api/hierarchy")
    return respond(make(http::status::ok, "application/json", hierarchy_json(server_.assets()).dump()));
  const auto file = static_path(server_.config().static_dir, path);
  if (!file) return respond(make(http::status::not_found, "text/plain", "not found\n"));
  std::error_code fec;
  if (!std::filesystem::is_regular_file(*file, fec))
    return respond(make(http::status::not_found, "text/plain", "not found\n"));
  std::ifstream in(*file, std::ios::binary);
  std::ostringstream body;
  body << in.rdbuf();
  auto res = make(http::status::ok, mime_type(*file), body.str());
  if (req_.method() == http::verb::head) res.body().clear();
  respond(std::move(res));
}

inline void HttpSession::respond(http::response<http::string_body> res) {
  auto sp = std::make_shared<http::response<http::string_body>>(std::move(res));
  http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code, std::size_t) {
    beast::error_code ec;
    self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  });
}

}  // namespace detail
}  // namespace holoview::session
