#pragma once

#include <chrono>
#include <optional>

#include "cookar/stream.hpp"
#include "cookar/wire.hpp"

namespace cookar {

/// Blocks until one whole message arrives. nullopt on a clean end of stream
/// at a message boundary. The length prefix is checked against the 16 MiB cap
/// before the body is read (ProtocolError); an end of stream inside a message
/// is a TransportError.
std::optional<wire::WireMessage> read_message(ByteStream& stream);

void write_message(ByteStream& stream, const wire::WireMessage& message);

enum class Side { client, server };

inline constexpr std::chrono::milliseconds kHandshakeTimeout{5000};

/// Both sides send HELLO first, then read the peer's HELLO. Returns the
/// negotiated version. ProtocolError on bad magic, wrong version or a
/// non-HELLO first message; TransportError on timeout or disconnect.
std::uint8_t handshake(ByteStream& stream, Side side, std::chrono::milliseconds timeout = kHandshakeTimeout);

}  // namespace cookar
