#pragma once

// WebSocket session service. Kept out of warpbci.hpp because it is the only
// header that needs Boost.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "warpbci/session.hpp"

namespace warpbci {

struct ServerConfig {
  std::string host{"127.0.0.1"};
  std::uint16_t port{8765};  // 0 picks a free port
  std::string static_dir;    // served under / when set
  std::int64_t tick_ms{100};
  SessionConfig session;
};

namespace server_detail {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

inline std::string mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".map" || ext == ".txt") return "text/plain; charset=utf-8";
  return "application/octet-stream";
}

// Resolves a request target inside root; empty when it escapes or is missing.
inline std::filesystem::path static_path(const std::string& root, std::string_view target) {
  namespace fs = std::filesystem;
  if (root.empty()) return {};
  std::string rel(target.substr(0, target.find_first_of("?#")));
  if (rel.empty() || rel.back() == '/') rel += "index.html";
  if (rel.find("..") != std::string::npos) return {};
  std::error_code ec;
  const fs::path base = fs::weakly_canonical(root, ec);
  const fs::path full = fs::weakly_canonical(base / rel.substr(1), ec);
  if (ec) return {};
  const auto [b, f] = std::mismatch(base.begin(), base.end(), full.begin(), full.end());
  if (b != base.end() || !fs::is_regular_file(full, ec)) return {};
  return full;
}

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, const ServerConfig& config)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), config_(config), session_(config.session) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->send(self->session_.open());
      self->read();
      if (!self->session_.test_clock()) self->schedule_tick();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->timer_.cancel();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->send(self->session_.handle(text));
      self->read();
    });
  }

  void schedule_tick() {
    timer_.expires_after(std::chrono::milliseconds(config_.tick_ms));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->send(self->session_.advance(self->config_.tick_ms));
      self->schedule_tick();
    });
  }

  void send(std::vector<std::string> messages) {
    const bool idle = queue_.empty();
    for (auto& m : messages) queue_.push_back(std::move(m));
    if (idle && !queue_.empty()) write_next();
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->closed_ = true;
                        self->timer_.cancel();
                        return;
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->write_next();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  asio::steady_timer timer_;
  const ServerConfig& config_;
  Session session_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closed_{false};
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, const ServerConfig& config)
      : stream_(std::move(socket)), config_(config) {}

  void start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->dispatch();
    });
  }

 private:
  void dispatch() {
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsConnection>(stream_.release_socket(), config_)->start(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::server, "warpbci");
    const std::string target(req_.target());
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      reply(*res, http::status::method_not_allowed, "text/plain", "method not allowed\n");
    } else if (target == "/health") {
      reply(*res, http::status::ok, "application/json", R"({"ok":true})");
    } else if (auto path = static_path(config_.static_dir, target); !path.empty()) {
      std::ifstream in(path, std::ios::binary);
      std::ostringstream body;
      body << in.rdbuf();
      reply(*res, http::status::ok, mime_type(path), body.str());
    } else {
      reply(*res, http::status::not_found, "text/plain", "not found\n");
    }
    if (req_.method() == http::verb::head) res->body().clear();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  static void reply(http::response<http::string_body>& res, http::status status, const std::string& type,
                    std::string body) {
    res.result(status);
    res.set(http::field::content_type, type);
    res.body() = std::move(body);
    res.prepare_payload();
  }

  beast::tcp_stream stream_;
  const ServerConfig& config_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace server_detail

// Single-threaded event loop serving /health, optional static files, and one
// Session per WebSocket connection.
class Server {
 public:
  explicit Server(ServerConfig config) : config_(std::move(config)), acceptor_(io_) {
    if (config_.tick_ms <= 0) throw ArgError("tick must be positive");
    namespace asio = boost::asio;
    const auto endpoint =
        server_detail::tcp::endpoint(asio::ip::make_address(config_.host), config_.port);
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen();
    accept();
  }

  std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

  void run() { io_.run(); }
  void stop() {
    boost::asio::post(io_, [this] {
      boost::system::error_code ignored;
      acceptor_.close(ignored);
      io_.stop();
    });
  }

 private:
  void accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, server_detail::tcp::socket socket) {
      if (ec) return;
      std::make_shared<server_detail::HttpConnection>(std::move(socket), config_)->start();
      accept();
    });
  }

  ServerConfig config_;
  boost::asio::io_context io_;
  server_detail::tcp::acceptor acceptor_;
};

}  // namespace warpbci
