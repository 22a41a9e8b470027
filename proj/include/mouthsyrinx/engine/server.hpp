#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "mouthsyrinx/engine/config.hpp"

namespace mouthsyrinx::engine {

class BindError : public IoError {
 public:
  using IoError::IoError;
};

// WebSocket service for one UI client at a time. A second client gets
// {"type":"error","msg":"busy"} and is closed. Binds in the constructor;
// port 0 picks a free port, reported by port().
class Server {
 public:
  Server(EngineConfig config, const std::string& host, std::uint16_t port);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  // Serves on the calling thread until stop().
  void run();
  // Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace mouthsyrinx::engine
