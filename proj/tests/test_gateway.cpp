#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "warpbci/server.hpp"
#include "scripts.hpp"
#include "ws_client.hpp"

using namespace warpbci;

namespace {

struct RunningServer {
  explicit RunningServer(ServerConfig c) : server(std::move(c)), thread([this] { server.run(); }) {}
  ~RunningServer() {
    server.stop();
    thread.join();
  }
  Server server;
  std::thread thread;
};

ServerConfig config(bool test_clock) {
  ServerConfig c;
  c.port = 0;
  c.session.lexicon = std::make_shared<const Lexicon>(load_lexicon(WARPBCI_DATA_DIR "/lexicon_en_50k.tsv"));
  c.session.fixtures_dir = WARPBCI_DATA_DIR "/fixtures";
  c.session.test_clock = test_clock;
  return c;
}

std::vector<std::string> golden() {
  std::ifstream in(WARPBCI_TEST_DIR "/golden/gateway_transcript.jsonl");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST(Gateway, Health) {
  RunningServer s(config(true));
  const auto r = wsclient::get(s.server.port(), "/health");
  EXPECT_EQ(r.status, 200u);
  EXPECT_EQ(r.content_type, "application/json");
  EXPECT_EQ(r.body, R"({"ok":true})");
  EXPECT_EQ(wsclient::get(s.server.port(), "/nothing").status, 404u);
}

TEST(Gateway, StaticFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "warpbci_static_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "index.html") << "<p>hi</p>";
  ServerConfig c = config(true);
  c.static_dir = dir.string();
  {
    RunningServer s(c);
    const auto r = wsclient::get(s.server.port(), "/");
    EXPECT_EQ(r.status, 200u);
    EXPECT_EQ(r.body, "<p>hi</p>");
    EXPECT_EQ(r.content_type, "text/html; charset=utf-8");
    EXPECT_EQ(wsclient::get(s.server.port(), "/../etc/passwd").status, 404u);
  }
  std::filesystem::remove_all(dir);
}

TEST(Gateway, ScriptedTranscript) {
  RunningServer s(config(true));
  EXPECT_EQ(wsclient::transcript(s.server.port(), scripts::gateway_script()), golden());
}
