#include "mouthsyrinx/engine/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <list>
#include <iostream>

#include "mouthsyrinx/engine/protocol.hpp"
#include "mouthsyrinx/engine/session.hpp"

namespace mouthsyrinx::engine {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const EngineConfig& config, bool busy)
      : ws_(std::move(socket)), config_(config), busy_(busy) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void close() {
    if (closed_) return;
    beast::error_code ec;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
    finish();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return finish();
    if (busy_) {
      Outgoing out;
      out.text = error_message("busy");
      enqueue(std::move(out));
      close_after_writes_ = true;
      return;
    }
    std::weak_ptr<Connection> weak = shared_from_this();
    auto executor = ws_.get_executor();
    session_ = std::make_unique<LiveSession>(config_, [weak, executor](Outgoing out) {
      asio::post(executor, [weak, out = std::move(out)]() mutable {
        if (auto self = weak.lock()) self->enqueue(std::move(out));
      });
    });
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      const auto data = self->buffer_.cdata();
      const auto* p = static_cast<const std::uint8_t*>(data.data());
      if (self->ws_.got_text()) {
        self->session_->handle_text(std::string_view(reinterpret_cast<const char*>(p), data.size()));
      } else {
        self->session_->handle_binary(std::span<const std::uint8_t>(p, data.size()));
      }
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void enqueue(Outgoing out) {
    if (closed_) return;
    if (out.kind == Outgoing::Kind::audio && ++queued_audio_ > config_.io.audio_queue) {
      // Drop the oldest audio chunk that is not being written.
      for (auto it = std::next(queue_.begin(), writing_ ? 1 : 0); it != queue_.end(); ++it) {
        if (it->kind == Outgoing::Kind::audio) {
          queue_.erase(it);
          --queued_audio_;
          break;
        }
      }
    }
    queue_.push_back(std::move(out));
    if (!writing_) write_next();
  }

  void write_next() {
    if (queue_.empty()) {
      writing_ = false;
      if (close_after_writes_) {
        ws_.async_close(websocket::close_code::try_again_later,
                        [self = shared_from_this()](beast::error_code) { self->finish(); });
      }
      return;
    }
    writing_ = true;
    const Outgoing& out = queue_.front();
    ws_.binary(out.binary());
    auto on_written = [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (self->queue_.front().kind == Outgoing::Kind::audio) --self->queued_audio_;
      self->queue_.pop_front();
      if (ec) return self->finish();
      self->write_next();
    };
    if (out.binary()) {
      ws_.async_write(asio::buffer(out.bytes), std::move(on_written));
    } else {
      ws_.async_write(asio::buffer(out.text), std::move(on_written));
    }
  }

  void finish() {
    if (closed_) return;
    closed_ = true;
    queue_.clear();
    if (session_) session_->stop();
  }

  websocket::stream<tcp::socket> ws_;
  EngineConfig config_;
  bool busy_;
  std::unique_ptr<LiveSession> session_;
  beast::flat_buffer buffer_;
  std::list<Outgoing> queue_;  // stable addresses while a write is in flight
  std::size_t queued_audio_ = 0;
  bool writing_ = false;
  bool closed_ = false;
  bool close_after_writes_ = false;

 public:
  bool active() const { return !closed_ && !busy_; }
};

}  // namespace

struct Server::Impl {
  EngineConfig config;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::weak_ptr<Connection> active;
  std::vector<std::weak_ptr<Connection>> all;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      const auto current = active.lock();
      const bool busy = current && current->active();
      auto conn = std::make_shared<Connection>(std::move(socket), config, busy);
      if (!busy) active = conn;
      all.push_back(conn);
      std::erase_if(all, [](const auto& w) { return w.expired(); });
      conn->start();
      accept();
    });
  }
};

Server::Server(EngineConfig config, const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  config.validate();
  impl_->config = std::move(config);
  beast::error_code ec;
  const auto address = asio::ip::make_address(host, ec);
  if (ec) throw BindError("invalid host address '" + host + "'");
  const tcp::endpoint endpoint(address, port);
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw BindError("cannot listen on " + host + ":" + std::to_string(port) + ": " + ec.message());
  impl_->accept();
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() { impl_->io.run(); }

void Server::start() {
  thread_ = std::thread([this] { run(); });
}

void Server::stop() {
  asio::post(impl_->io, [impl = impl_.get()] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    for (auto& w : impl->all) {
      if (auto c = w.lock()) c->close();
    }
    impl->io.stop();
  });
  if (thread_.joinable()) thread_.join();
}

}  // namespace mouthsyrinx::engine
