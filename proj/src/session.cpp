#include "cookar/session.hpp"

#include <array>

#include "cookar/error.hpp"

namespace cookar {

std::optional<wire::WireMessage> read_message(ByteStream& stream) {
  std::array<std::uint8_t, 4> header{};
  const std::size_t first = stream.read_some(header);
  if (first == 0) return std::nullopt;
  if (first < header.size()) read_exact(stream, std::span(header).subspan(first));

  const std::uint32_t length = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                               (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (length > wire::kMaxMessageLength) {
    throw ProtocolError("declared message length " + std::to_string(length) + " exceeds the 16 MiB cap");
  }
  if (length == 0) throw ProtocolError("zero-length message");

  std::uint8_t kind = 0;
  read_exact(stream, std::span(&kind, 1));
  if (kind > static_cast<std::uint8_t>(wire::MessageKind::error)) {
    throw DecodeError("kind", "unknown message kind " + std::to_string(kind));
  }
  wire::WireMessage msg{static_cast<wire::MessageKind>(kind), std::vector<std::uint8_t>(length - 1)};
  read_exact(stream, msg.payload);
  return msg;
}

void write_message(ByteStream& stream, const wire::WireMessage& message) {
  stream.write_all(wire::encode_message(message));
}

std::uint8_t handshake(ByteStream& stream, Side side, std::chrono::milliseconds timeout) {
  (void)side;  // symmetric: both sides send first
  write_message(stream, wire::hello_message());
  stream.set_read_timeout(timeout);
  std::optional<wire::WireMessage> peer;
  try {
    peer = read_message(stream);
  } catch (...) {
    stream.set_read_timeout(std::chrono::milliseconds(0));
    throw;
  }
  stream.set_read_timeout(std::chrono::milliseconds(0));
  if (!peer) throw TransportError("peer closed the connection during handshake");
  if (peer->kind != wire::MessageKind::hello) {
    throw ProtocolError("expected HELLO as the first message");
  }
  const wire::Hello hello = wire::decode_hello_payload(peer->payload);
  if (hello.version != wire::kProtocolVersion) {
    throw ProtocolError("unsupported protocol version " + std::to_string(hello.version));
  }
  return hello.version;
}

}  // namespace cookar
