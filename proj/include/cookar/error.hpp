#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cookar {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Ring with fewer than three vertices, non-finite coordinates, singular transform.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Malformed payload. field() names the first field that failed to decode.
class DecodeError : public ProtocolError {
 public:
  DecodeError(std::string field, const std::string& what)
      : ProtocolError("decode error in '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

// ERROR message received from a peer.
class RemoteError : public Error {
 public:
  RemoteError(std::uint16_t code, std::uint64_t frame_id, const std::string& message)
      : Error("remote error " + std::to_string(code) + ": " + message), code_(code), frame_id_(frame_id) {}
  std::uint16_t code() const noexcept { return code_; }
  std::uint64_t frame_id() const noexcept { return frame_id_; }

 private:
  std::uint16_t code_;
  std::uint64_t frame_id_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cookar
