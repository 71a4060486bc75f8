#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "cookar/provider.hpp"
#include "cookar/stream.hpp"

namespace cookar {

struct ServeConfig {
  Endpoint endpoint{"127.0.0.1", 7465};
  double confidence_threshold = kDefaultConfidenceThreshold;
  std::chrono::milliseconds handshake_timeout{5000};
};

/// Exposes a provider over the wire protocol. Every connection runs its own
/// session thread: HELLO exchange, then one RESULT per FRAME (same frame_id),
/// dropping instances below the threshold. A malformed or unexpected message
/// gets an ERROR and the connection is closed; a provider failure gets an
/// ERROR tagged with the frame id and the session continues.
class SegmentationServer {
 public:
  SegmentationServer(std::shared_ptr<SegmentationProvider> provider, ServeConfig config);
  ~SegmentationServer();
  SegmentationServer(const SegmentationServer&) = delete;
  SegmentationServer& operator=(const SegmentationServer&) = delete;

  /// Binds and starts accepting. Returns the bound port.
  std::uint16_t start();
  void stop();
  std::uint16_t port() const noexcept { return port_; }
  std::size_t sessions_started() const noexcept { return sessions_started_; }

  /// Handles one already-connected stream on the calling thread.
  void serve_stream(ByteStream& stream);

 private:
  struct Session {
    std::unique_ptr<SocketStream> stream;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void reap_finished();

  std::shared_ptr<SegmentationProvider> provider_;
  ServeConfig config_;
  std::unique_ptr<TcpListener> listener_;
  std::thread acceptor_;
  std::mutex provider_mutex_;
  std::mutex sessions_mutex_;
  std::vector<std::unique_ptr<Session>> sessions_;
  std::atomic<bool> running_{false};
  std::atomic<std::size_t> sessions_started_{0};
  std::uint16_t port_ = 0;
};

}  // namespace cookar
