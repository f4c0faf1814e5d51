#pragma once

// Blocking client helpers for talking to a running gateway.

#include <string>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace wsclient {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

inline constexpr const char* kEndMarker = R"({"v":1,"type":"Error","message":"unsupported protocol version 2"})";

// Sends every message, then reads replies until the end marker. The session
// handles messages in order, so the transcript does not depend on timing.
inline std::vector<std::string> transcript(unsigned short port, const std::vector<std::string>& messages) {
  asio::io_context io;
  websocket::stream<tcp::socket> ws(io);
  tcp::resolver resolver(io);
  asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
  ws.handshake("127.0.0.1", "/ws");
  ws.text(true);
  for (const auto& m : messages) ws.write(asio::buffer(m));
  std::vector<std::string> lines;
  for (;;) {
    beast::flat_buffer buf;
    ws.read(buf);
    lines.push_back(beast::buffers_to_string(buf.data()));
    if (lines.back() == kEndMarker) break;
  }
  ws.close(websocket::close_code::normal);
  return lines;
}

struct HttpReply {
  unsigned status;
  std::string content_type;
  std::string body;
};

inline HttpReply get(unsigned short port, const std::string& target) {
  asio::io_context io;
  beast::tcp_stream stream(io);
  tcp::resolver resolver(io);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::string_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(stream, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(stream, buf, res);
  beast::error_code ignored;
  stream.socket().shutdown(tcp::socket::shutdown_both, ignored);
  return {res.result_int(), std::string(res[http::field::content_type]), res.body()};
}

}  // namespace wsclient
