#include "cookar/stream.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "cookar/error.hpp"

namespace cookar {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in resolve(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(endpoint.host.c_str(), nullptr, &hints, &res);
  if (rc != 0 || res == nullptr) {
    throw TransportError("cannot resolve host '" + endpoint.host + "': " + ::gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  ::freeaddrinfo(res);
  addr.sin_port = htons(endpoint.port);
  return addr;
}

}  // namespace

void read_exact(ByteStream& stream, std::span<std::uint8_t> buf) {
  std::size_t got = 0;
  while (got < buf.size()) {
    const std::size_t n = stream.read_some(buf.subspan(got));
    if (n == 0) {
      throw TransportError("stream ended after " + std::to_string(got) + " of " + std::to_string(buf.size()) +
                           " bytes");
    }
    got += n;
  }
}

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw InvalidArgument("endpoint must look like host:port, got '" + text + "'");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    const unsigned long port = std::stoul(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1 || port > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw InvalidArgument("invalid port in endpoint '" + text + "'");
  }
  return ep;
}

SocketStream::~SocketStream() {
  if (fd_ >= 0) ::close(fd_);
}

std::size_t SocketStream::read_some(std::span<std::uint8_t> buf) {
  if (buf.empty()) return 0;
  for (;;) {
    if (closed_) return 0;
    const long long timeout = read_timeout_ms_;
    if (timeout > 0) {
      pollfd p{fd_, POLLIN, 0};
      const int rc = ::poll(&p, 1, static_cast<int>(timeout));
      if (rc == 0) throw TimeoutError("read timed out after " + std::to_string(timeout) + " ms");
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw TransportError(errno_text("poll"));
      }
    }
    const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno == EINTR) continue;
    if (closed_) return 0;
    throw TransportError(errno_text("recv"));
  }
}

void SocketStream::write_all(std::span<const std::uint8_t> data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    if (closed_) throw TransportError("write on closed stream");
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

void SocketStream::close() noexcept {
  if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
}

std::unique_ptr<SocketStream> connect_tcp(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(endpoint);
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw TransportError(errno_text("socket"));
  auto stream = std::make_unique<SocketStream>(fd);

  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
  if (rc < 0 && errno == EINPROGRESS) {
    pollfd p{fd, POLLOUT, 0};
    rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc == 0) throw TimeoutError("connect to " + endpoint.str() + " timed out");
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) throw TransportError("cannot connect to " + endpoint.str() + ": " + std::strerror(err));
  } else if (rc < 0) {
    throw TransportError("cannot connect to " + endpoint.str() + ": " + std::strerror(errno));
  }
  ::fcntl(fd, F_SETFL, flags);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return stream;
}

std::pair<std::unique_ptr<SocketStream>, std::unique_ptr<SocketStream>> socket_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) throw TransportError(errno_text("socketpair"));
  return {std::make_unique<SocketStream>(fds[0]), std::make_unique<SocketStream>(fds[1])};
}

TcpListener::TcpListener(const Endpoint& endpoint) {
  const sockaddr_in addr = resolve(endpoint);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw TransportError(errno_text("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string msg = "cannot bind " + endpoint.str() + ": " + std::strerror(errno);
    ::close(fd_);
    throw TransportError(msg);
  }
  if (::listen(fd_, 16) != 0) {
    const std::string msg = errno_text("listen");
    ::close(fd_);
    throw TransportError(msg);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<SocketStream> TcpListener::accept() {
  while (!closed_) {
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, 50);
    if (rc == 0) continue;
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("poll"));
    }
    const int client = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (client < 0) {
      if (errno == EINTR || errno == ECONNABORTED || errno == EAGAIN) continue;
      throw TransportError(errno_text("accept"));
    }
    int one = 1;
    ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return std::make_unique<SocketStream>(client);
  }
  return nullptr;
}

}  // namespace cookar
