#include "hasm/server.hpp"

#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "hasm/error.hpp"
#include "hasm/log.hpp"
#include "hasm/protocol.hpp"

namespace hasm {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

class WsClient;

}  // namespace

struct Server::Impl {
  Session& session;
  ServerOptions options;
  net::io_context io{1};
  tcp::acceptor acceptor{io};
  std::thread worker;
  std::uint16_t bound_port = 0;

  mutable std::mutex clients_mu;
  std::set<std::shared_ptr<WsClient>> clients;
  std::size_t dropped = 0;

  Impl(Session& s, ServerOptions o) : session(s), options(std::move(o)) {}

  void accept();
  void add(const std::shared_ptr<WsClient>& c);
  void remove(const std::shared_ptr<WsClient>& c, bool dropped_for_lag);
  void broadcast(const std::string& text);
  std::size_t client_count() const {
    std::lock_guard lock(clients_mu);
    return clients.size();
  }
};

namespace {

class WsClient : public std::enable_shared_from_this<WsClient> {
 public:
  WsClient(tcp::socket&& socket, Server::Impl& server) : ws_(std::move(socket)), server_(server) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  // Safe from any thread.
  void send(std::shared_ptr<const std::string> text) {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)] { self->enqueue(text); });
  }

  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] { self->shutdown(false); });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    server_.add(shared_from_this());
    enqueue(std::make_shared<const std::string>(wire::serialize(wire::ServerMessage{server_.session.hello()})));
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      shutdown(false);
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      std::weak_ptr<WsClient> weak = weak_from_this();
      server_.session.submit(wire::parse_client(text), [weak](const wire::ServerMessage& reply) {
        if (auto self = weak.lock()) self->send(std::make_shared<const std::string>(wire::serialize(reply)));
      });
    } catch (const Error& e) {
      enqueue(std::make_shared<const std::string>(wire::serialize(wire::ServerMessage{wire::ErrorReply{e.what()}})));
    }
    read();
  }

  void enqueue(std::shared_ptr<const std::string> text) {
    if (closed_) return;
    if (out_.size() >= server_.options.max_queued) {
      shutdown(true);
      return;
    }
    out_.push_back(std::move(text));
    if (!writing_) write_next();
  }

  void write_next() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(*out_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
  }

  void on_write(beast::error_code ec) {
    writing_ = false;
    if (ec) {
      shutdown(false);
      return;
    }
    out_.pop_front();
    if (!out_.empty() && !closed_) write_next();
  }

  void shutdown(bool lagging) {
    if (closed_) return;
    closed_ = true;
    out_.clear();
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).socket().close(ignored);
    server_.remove(shared_from_this(), lagging);
  }

  websocket::stream<beast::tcp_stream> ws_;
  Server::Impl& server_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> out_;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Server::Impl& server) : stream_(std::move(socket)), server_(server) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

 private:
  void on_read(beast::error_code ec) {
    if (ec) return;
    const std::string target(req_.target());
    if (websocket::is_upgrade(req_)) {
      if (target == "/session") {
        stream_.expires_never();
        std::make_shared<WsClient>(stream_.release_socket(), server_)->run(std::move(req_));
        return;
      }
      respond(http::status::not_found, R"({"error":"not found"})");
      return;
    }
    if (target == "/healthz" && (req_.method() == http::verb::get || req_.method() == http::verb::head)) {
      const nlohmann::json body = {{"status", "ok"},
                                   {"tick", server_.session.tick_count()},
                                   {"clients", server_.client_count()}};
      respond(http::status::ok, body.dump());
      return;
    }
    respond(http::status::not_found, R"({"error":"not found"})");
  }

  void respond(http::status status, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, "application/json");
    res->keep_alive(false);
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  Server::Impl& server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

void Server::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != net::error::operation_aborted) log_warning("accept failed: " + ec.message());
      if (!acceptor.is_open()) return;
    } else {
      if (options.send_buffer_bytes > 0) {
        beast::error_code ignored;
        socket.set_option(net::socket_base::send_buffer_size(options.send_buffer_bytes), ignored);
      }
      std::make_shared<HttpSession>(std::move(socket), *this)->run();
    }
    accept();
  });
}

void Server::Impl::add(const std::shared_ptr<WsClient>& c) {
  std::lock_guard lock(clients_mu);
  clients.insert(c);
}

void Server::Impl::remove(const std::shared_ptr<WsClient>& c, bool dropped_for_lag) {
  std::lock_guard lock(clients_mu);
  if (clients.erase(c) > 0 && dropped_for_lag) {
    ++dropped;
    log_warning("dropped a websocket client that fell behind");
  }
}

void Server::Impl::broadcast(const std::string& text) {
  auto shared = std::make_shared<const std::string>(text);
  std::lock_guard lock(clients_mu);
  for (const auto& c : clients) c->send(shared);
}

Server::Server(Session& session, ServerOptions options) : impl_(std::make_unique<Impl>(session, std::move(options))) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->worker.joinable()) return;
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->options.address, ec);
  if (ec) fail(ErrorKind::config, "serve: bad bind address '" + impl_->options.address + "'");
  const tcp::endpoint endpoint(address, impl_->options.port);
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) fail(ErrorKind::io, "serve: cannot listen on " + impl_->options.address + ":" +
                                  std::to_string(impl_->options.port) + ": " + ec.message());
  impl_->bound_port = impl_->acceptor.local_endpoint().port();
  impl_->session.set_observer([impl = impl_.get()](const std::string& text) { impl->broadcast(text); });
  impl_->accept();
  impl_->worker = std::thread([impl = impl_.get()] { impl->io.run(); });
}

void Server::stop() {
  if (!impl_ || !impl_->worker.joinable()) return;
  impl_->session.set_observer({});
  net::post(impl_->io, [impl = impl_.get()] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
  });
  {
    std::lock_guard lock(impl_->clients_mu);
    for (const auto& c : impl_->clients) c->close();
  }
  impl_->io.stop();
  impl_->worker.join();
  std::lock_guard lock(impl_->clients_mu);
  impl_->clients.clear();
}

std::uint16_t Server::port() const { return impl_->bound_port; }

std::size_t Server::client_count() const { return impl_->client_count(); }

std::size_t Server::dropped_clients() const {
  std::lock_guard lock(impl_->clients_mu);
  return impl_->dropped;
}

}  // namespace hasm
