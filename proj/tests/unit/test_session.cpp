#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <numeric>
#include <thread>
#include <vector>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "hasm/config.hpp"
#include "hasm/controller.hpp"
#include "hasm/protocol.hpp"
#include "hasm/scenarios.hpp"
#include "hasm/server.hpp"
#include "hasm/session.hpp"
#include "hasm/sim.hpp"

namespace hasm {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace ws = beast::websocket;
using tcp = asio::ip::tcp;
using namespace std::chrono_literals;

// Continuous drive needs the fine place code: with 4 bits several keys share
// a quantization cell and their mean next state can equal the current one.
AppConfig session_config() { return compliance_config(); }

// Bank for wrist_upper trained on constant-force sweeps of arm_flex.
const MemoryBank& upper_bank() {
  static const MemoryBank bank = [] {
    const AppConfig cfg = session_config();
    ComplianceSetup setup;
    setup.train_levels = {4.0, 8.0, 12.0};
    setup.repetitions = 1;
    const Recording rec = compliance_recording(cfg, setup, "wrist_upper", 1);
    return train_from_recordings(std::span(&rec, 1), cfg, "wrist_upper", cfg.memory.beta);
  }();
  return bank;
}

TEST(Session, TouchMovesTheArm) {
  Session s(session_config(), 1);
  s.load_bank(upper_bank());
  const double start = s.step().angles[1];
  for (int k = 0; k < 10; ++k) EXPECT_EQ(s.step().angles[1], start);  // untouched arm stays put
  s.submit(wire::Touch{"wrist_upper", 8.0, true});
  wire::Tick t;
  bool active = false;
  for (int k = 0; k < 60; ++k) {
    t = s.step();
    active = active || t.active_patch == "wrist_upper";
  }
  EXPECT_TRUE(active);
  EXPECT_LT(t.angles[1], start - 0.1);
  s.submit(wire::Touch{"wrist_upper", 0.0, false});
  for (int k = 0; k < 10; ++k) t = s.step();
  const double rest = t.angles[1];
  for (int k = 0; k < 10; ++k) EXPECT_EQ(s.step().angles[1], rest);
}

TEST(Session, HigherBetaGivesLowerEntropy) {
  auto entropy_at = [](double beta) {
    Session s(session_config(), 1);
    s.load_bank(upper_bank());
    s.submit(wire::SetBeta{beta});
    s.submit(wire::Touch{"wrist_upper", 8.0, true});
    std::vector<double> h;
    for (int k = 0; k < 40; ++k) {
      const auto t = s.step();
      if (t.entropy) h.push_back(*t.entropy);
    }
    EXPECT_FALSE(h.empty());
    return std::accumulate(h.begin(), h.end(), 0.0) / static_cast<double>(std::max<std::size_t>(h.size(), 1));
  };
  const double loose = entropy_at(0.1), sharp = entropy_at(32.0);
  EXPECT_GT(loose, sharp);
}

TEST(Session, CommandsAreAckedOrRejected) {
  Session s(session_config(), 1);
  std::vector<std::string> replies;
  auto sink = [&](const wire::ServerMessage& m) { replies.push_back(wire::serialize(m)); };
  s.submit(wire::SetBeta{4.0}, sink);
  s.submit(wire::LoadBank{"/nonexistent.bank"}, sink);
  s.submit(wire::Touch{"nope", 1.0, true}, sink);
  s.submit(wire::Reset{std::vector<double>{0.0, -1.0}}, sink);
  const auto t = s.step();
  ASSERT_EQ(replies.size(), 4u);
  EXPECT_NE(replies[0].find("\"ack\""), std::string::npos);
  for (int i = 1; i < 4; ++i) EXPECT_NE(replies[i].find("\"error\""), std::string::npos) << replies[i];
  EXPECT_EQ(t.beta, 4.0);
}

TEST(Session, SameSeedSameTicks) {
  auto run = [] {
    Session s(session_config(), 9);
    s.load_bank(upper_bank());
    s.submit(wire::Touch{"wrist_upper", 6.0, true});
    std::string all;
    for (int k = 0; k < 60; ++k) all += wire::serialize(wire::ServerMessage{s.step()});
    return all;
  };
  EXPECT_EQ(run(), run());
}

// --- network ---------------------------------------------------------------

std::string http_get(std::uint16_t port, const std::string& target, unsigned* status) {
  asio::io_context ioc;
  beast::tcp_stream stream(ioc);
  stream.connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), port));
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(stream, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(stream, buf, res);
  *status = res.result_int();
  return res.body();
}

struct WsClient {
  asio::io_context ioc;
  ws::stream<tcp::socket> stream{ioc};

  explicit WsClient(std::uint16_t port, int rcvbuf = 0) {
    auto& sock = stream.next_layer();
    sock.open(tcp::v4());
    if (rcvbuf > 0) sock.set_option(asio::socket_base::receive_buffer_size(rcvbuf));
    sock.connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), port));
    stream.handshake("127.0.0.1", "/session");
  }

  nlohmann::json read() {
    beast::flat_buffer buf;
    stream.read(buf);
    return nlohmann::json::parse(beast::buffers_to_string(buf.data()));
  }

  void send(const wire::ClientMessage& m) { stream.write(asio::buffer(wire::serialize(m))); }
};

struct Running {
  Session session;
  Server server;
  Running(ServerOptions opts) : session(session_config(), 1), server(session, opts) {
    session.load_bank(upper_bank());
    server.start();
    session.start();
  }
  ~Running() {
    session.stop();
    server.stop();
  }
};

TEST(Server, HealthzAndNotFound) {
  Running r(ServerOptions{});
  std::this_thread::sleep_for(100ms);
  unsigned status = 0;
  const auto body = nlohmann::json::parse(http_get(r.server.port(), "/healthz", &status));
  EXPECT_EQ(status, 200u);
  EXPECT_EQ(body["status"], "ok");
  EXPECT_GT(body["tick"].get<std::uint64_t>(), 0u);
  http_get(r.server.port(), "/elsewhere", &status);
  EXPECT_EQ(status, 404u);
}

TEST(Server, HelloTicksAndTouch) {
  Running r(ServerOptions{});
  WsClient c(r.server.port());
  const auto hello = c.read();
  EXPECT_EQ(hello["type"], "hello");
  EXPECT_EQ(hello["joints"].size(), 3u);
  auto first = c.read();
  while (first["type"] != "tick") first = c.read();
  const double start = first["angles"][1].get<double>();

  c.send(wire::Touch{"wrist_upper", 8.0, true});
  std::uint64_t last_tick = first["tick"].get<std::uint64_t>();
  double flex = start;
  for (int k = 0; k < 60; ++k) {
    const auto m = c.read();
    if (m["type"] != "tick") continue;
    EXPECT_GT(m["tick"].get<std::uint64_t>(), last_tick);
    last_tick = m["tick"].get<std::uint64_t>();
    flex = m["angles"][1].get<double>();
  }
  EXPECT_LT(flex, start - 0.1);

  c.send(wire::SetBeta{-1.0});  // the server rejects it on parse
  bool saw_error = false;
  for (int k = 0; k < 20 && !saw_error; ++k) saw_error = c.read()["type"] == "error";
  EXPECT_TRUE(saw_error);
}

TEST(Server, SlowClientsAreDroppedWithoutStallingTheLoop) {
  ServerOptions opts;
  opts.max_queued = 8;
  opts.send_buffer_bytes = 4096;
  Running r(opts);

  std::atomic<bool> done{false};
  std::atomic<int> fast_ok{0};
  std::vector<std::thread> fast;
  for (int i = 0; i < 7; ++i) {
    fast.emplace_back([&, port = r.server.port()] {
      WsClient c(port);
      int ticks = 0;
      while (!done) {
        if (c.read()["type"] == "tick") ++ticks;
      }
      if (ticks > 100) ++fast_ok;
    });
  }
  std::vector<std::unique_ptr<WsClient>> slow;
  for (int i = 0; i < 3; ++i) slow.push_back(std::make_unique<WsClient>(r.server.port(), 1024));  // never read

  std::this_thread::sleep_for(4s);
  const auto dropped = r.server.dropped_clients();
  const auto periods = r.session.tick_periods();
  done = true;
  for (auto& t : fast) t.join();

  EXPECT_GE(dropped, 3u);
  EXPECT_EQ(fast_ok.load(), 7);
  ASSERT_GT(periods.size(), 100u);
  const double mean = std::accumulate(periods.begin(), periods.end(), 0.0) / static_cast<double>(periods.size());
  EXPECT_NEAR(mean, 0.02, 0.002);
  std::vector<double> sorted = periods;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_NEAR(sorted[sorted.size() / 2], 0.02, 0.002);
}

}  // namespace
}  // namespace hasm
