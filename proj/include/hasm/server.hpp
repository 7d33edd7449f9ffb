#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include "hasm/session.hpp"

namespace hasm {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;            // 0 picks a free port
  std::size_t max_queued = 64;       // outbound messages per client before it is dropped
  int send_buffer_bytes = 0;         // SO_SNDBUF for accepted sockets, 0 keeps the OS default
};

// WebSocket endpoint /session (hello, tick stream, command channel) and
// HTTP GET /healthz. All network I/O runs on one worker thread; the session
// loop only ever posts to it.
class Server {
 public:
  Server(Session& session, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  void stop();

  std::uint16_t port() const;
  std::size_t client_count() const;
  std::size_t dropped_clients() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace hasm
