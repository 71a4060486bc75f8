#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cookar/types.hpp"

namespace cookar::wire {

// Every message: [length: u32 BE, counts kind + payload][kind: u8][payload].
// All multi-byte integers are big-endian.

enum class MessageKind : std::uint8_t { hello = 0x00, frame = 0x01, result = 0x02, error = 0x03 };

inline constexpr std::uint32_t kMaxMessageLength = 16u * 1024u * 1024u;
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr char kMagic[4] = {'C', 'K', 'A', 'R'};
inline constexpr std::size_t kFrameHeaderSize = 22;
inline constexpr std::size_t kResultHeaderSize = 14;
inline constexpr std::uint8_t kPixelFormatRgb8 = 0;
inline constexpr std::uint8_t kUnknownClassByte = 0xFF;
inline constexpr double kConfidenceScale = 10000.0;
inline constexpr std::uint64_t kNoFrame = ~std::uint64_t{0};

// ERROR codes.
inline constexpr std::uint16_t kErrorMalformed = 400;
inline constexpr std::uint16_t kErrorUnexpected = 409;
inline constexpr std::uint16_t kErrorVersion = 426;
inline constexpr std::uint16_t kErrorProvider = 500;

struct WireMessage {
  MessageKind kind = MessageKind::hello;
  std::vector<std::uint8_t> payload;
  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

struct Hello {
  std::uint8_t version = kProtocolVersion;
};

struct ResultPayload {
  std::uint64_t frame_id = 0;
  std::uint32_t inference_us = 0;
  std::vector<AffordanceInstance> instances;
  friend bool operator==(const ResultPayload&, const ResultPayload&) = default;
};

/// ERROR payload: [code: u16][frame_id: u64, all ones when not frame-specific]
/// [message_length: u16][message: UTF-8].
struct ErrorPayload {
  std::uint16_t code = 0;
  std::uint64_t frame_id = kNoFrame;
  std::string message;
  friend bool operator==(const ErrorPayload&, const ErrorPayload&) = default;
};

/// Length prefix + kind + payload. Throws ProtocolError above the 16 MiB cap.
std::vector<std::uint8_t> encode_message(const WireMessage& message);

/// Decodes one whole framed message from exactly `bytes`.
WireMessage decode_message(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_hello_payload(std::uint8_t version = kProtocolVersion);
/// Throws ProtocolError on bad magic; the version byte is returned as-is.
Hello decode_hello_payload(std::span<const std::uint8_t> payload);

/// Depth is not carried. Throws InvalidArgument when dimensions exceed 65535.
std::vector<std::uint8_t> encode_frame_payload(const FrameEnvelope& frame);
FrameEnvelope decode_frame_payload(std::span<const std::uint8_t> payload);

/// Vertices are rounded to the nearest integer pixel, confidences to 1e-4.
/// Throws ProtocolError for counts that do not fit their fields.
std::vector<std::uint8_t> encode_result_payload(const ResultPayload& result);
ResultPayload decode_result_payload(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_error_payload(const ErrorPayload& error);
ErrorPayload decode_error_payload(std::span<const std::uint8_t> payload);

WireMessage hello_message(std::uint8_t version = kProtocolVersion);
WireMessage frame_message(const FrameEnvelope& frame);
WireMessage result_message(const ResultPayload& result);
WireMessage error_message(const ErrorPayload& error);

std::uint16_t quantize_confidence(double confidence);

}  // namespace cookar::wire
