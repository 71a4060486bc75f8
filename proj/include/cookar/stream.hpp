#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>

namespace cookar {

/// Reliable ordered byte stream.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  /// Reads at most buf.size() bytes, blocking until at least one arrives.
  /// Returns 0 at end of stream. Throws TimeoutError or TransportError.
  virtual std::size_t read_some(std::span<std::uint8_t> buf) = 0;
  virtual void write_all(std::span<const std::uint8_t> data) = 0;
  /// Unblocks pending reads; further I/O fails. Safe from any thread.
  virtual void close() noexcept = 0;
  /// Bounds each blocking read. Zero disables. Streams without timeouts ignore it.
  virtual void set_read_timeout(std::chrono::milliseconds /*timeout*/) noexcept {}
};

/// Throws TransportError when the stream ends before buf is filled.
void read_exact(ByteStream& stream, std::span<std::uint8_t> buf);

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7465;

  /// "host:port". Throws InvalidArgument.
  static Endpoint parse(const std::string& text);
  std::string str() const { return host + ":" + std::to_string(port); }
};

class SocketStream final : public ByteStream {
 public:
  explicit SocketStream(int fd) noexcept : fd_(fd) {}
  ~SocketStream() override;
  SocketStream(const SocketStream&) = delete;
  SocketStream& operator=(const SocketStream&) = delete;

  std::size_t read_some(std::span<std::uint8_t> buf) override;
  void write_all(std::span<const std::uint8_t> data) override;
  void close() noexcept override;

  void set_read_timeout(std::chrono::milliseconds timeout) noexcept override {
    read_timeout_ms_ = timeout.count();
  }

 private:
  int fd_;
  std::atomic<bool> closed_{false};
  std::atomic<long long> read_timeout_ms_{0};
};

/// Throws TransportError when the endpoint is unreachable.
std::unique_ptr<SocketStream> connect_tcp(const Endpoint& endpoint,
                                          std::chrono::milliseconds timeout = std::chrono::seconds(5));

/// Connected pair of local stream sockets.
std::pair<std::unique_ptr<SocketStream>, std::unique_ptr<SocketStream>> socket_pair();

class TcpListener {
 public:
  /// Binds and listens; port 0 picks a free port. Throws TransportError.
  explicit TcpListener(const Endpoint& endpoint);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Blocks until a client connects; nullptr once close() was called.
  std::unique_ptr<SocketStream> accept();
  void close() noexcept { closed_ = true; }

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> closed_{false};
};

}  // namespace cookar
