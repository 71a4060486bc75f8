#pragma once

#include <atomic>
#include <chrono>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "cookar/provider.hpp"
#include "cookar/stream.hpp"
#include "cookar/wire.hpp"

namespace cookar {

struct RemoteOptions {
  std::chrono::milliseconds timeout{1000};          ///< per-frame RESULT wait
  std::chrono::milliseconds connect_timeout{5000};  ///< connect + HELLO exchange
};

struct SegmentResult {
  std::uint64_t frame_id = 0;
  std::uint32_t inference_us = 0;
  std::vector<AffordanceInstance> instances;
};

/// Client side of one protocol connection. Frames may be pipelined; a reader
/// thread routes each RESULT to the submit() whose frame_id it carries, so
/// out-of-order replies are fine.
class RemoteClient {
 public:
  /// Connects and exchanges HELLO. TransportError if unreachable.
  static std::unique_ptr<RemoteClient> connect(const Endpoint& endpoint, RemoteOptions options = {});

  /// Takes over an already-connected stream and exchanges HELLO.
  explicit RemoteClient(std::unique_ptr<ByteStream> stream, RemoteOptions options = {});
  ~RemoteClient();
  RemoteClient(const RemoteClient&) = delete;
  RemoteClient& operator=(const RemoteClient&) = delete;

  /// Sends FRAME. The future fails with RemoteError (server ERROR for this
  /// frame) or TransportError (connection lost).
  std::future<SegmentResult> submit(const FrameEnvelope& frame);

  /// Waits for a submitted frame; TimeoutError names the frame id.
  SegmentResult wait(std::uint64_t frame_id, std::future<SegmentResult>& pending);

  /// submit() + wait().
  SegmentResult segment(const FrameEnvelope& frame);

  void close() noexcept;
  const RemoteOptions& options() const noexcept { return options_; }

 private:
  void reader_loop();
  void fail_all(const std::exception_ptr& error);

  std::unique_ptr<ByteStream> stream_;
  RemoteOptions options_;
  std::mutex write_mutex_;
  std::mutex pending_mutex_;
  std::map<std::uint64_t, std::promise<SegmentResult>> pending_;
  std::exception_ptr broken_;
  std::thread reader_;
};

/// remote_segment as a provider: frames go to a remote server.
class RemoteBackend final : public SegmentationProvider {
 public:
  explicit RemoteBackend(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  std::vector<AffordanceInstance> segment(const FrameEnvelope& frame) override {
    return client_->segment(frame).instances;
  }
  RemoteClient& client() noexcept { return *client_; }

 private:
  std::shared_ptr<RemoteClient> client_;
};

}  // namespace cookar
