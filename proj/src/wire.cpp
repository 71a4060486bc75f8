#include "cookar/wire.hpp"

#include <cmath>
#include <cstring>

#include "cookar/error.hpp"

namespace cookar::wire {

namespace {

class Writer {
 public:
  explicit Writer(std::size_t reserve = 0) { out_.reserve(reserve); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8(const char* field) { return need(1, field)[0]; }
  std::uint16_t u16(const char* field) {
    auto b = need(2, field);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
  }
  std::uint32_t u32(const char* field) {
    auto b = need(4, field);
    std::uint32_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
  }
  std::uint64_t u64(const char* field) {
    auto b = need(8, field);
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* field) { return need(n, field); }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  void expect_end(const char* what) const {
    if (remaining() != 0) {
      throw DecodeError(what, std::to_string(remaining()) + " unexpected trailing bytes");
    }
  }

 private:
  std::span<const std::uint8_t> need(std::size_t n, const char* field) {
    if (remaining() < n) throw DecodeError(field, "truncated payload");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint16_t wire_coordinate(double v) {
  const double r = std::round(v);
  if (!std::isfinite(r) || r < 0.0 || r > 65535.0) {
    throw ProtocolError("vertex coordinate out of wire range: " + std::to_string(v));
  }
  return static_cast<std::uint16_t>(r);
}

}  // namespace

std::vector<std::uint8_t> encode_message(const WireMessage& message) {
  const std::size_t length = message.payload.size() + 1;
  if (length > kMaxMessageLength) throw ProtocolError("message exceeds 16 MiB cap");
  Writer w(length + 4);
  w.u32(static_cast<std::uint32_t>(length));
  w.u8(static_cast<std::uint8_t>(message.kind));
  w.bytes(message.payload);
  return w.take();
}

WireMessage decode_message(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint32_t length = r.u32("length");
  if (length == 0) throw DecodeError("length", "zero-length message has no kind byte");
  if (length > kMaxMessageLength) throw ProtocolError("declared length exceeds 16 MiB cap");
  const std::uint8_t kind = r.u8("kind");
  if (kind > static_cast<std::uint8_t>(MessageKind::error)) {
    throw DecodeError("kind", "unknown message kind " + std::to_string(kind));
  }
  auto payload = r.take(length - 1, "payload");
  r.expect_end("message");
  return {static_cast<MessageKind>(kind), {payload.begin(), payload.end()}};
}

std::vector<std::uint8_t> encode_hello_payload(std::uint8_t version) {
  Writer w(5);
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(version);
  return w.take();
}

Hello decode_hello_payload(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw DecodeError("magic", "bad HELLO magic");
  Hello h{r.u8("version")};
  r.expect_end("hello");
  return h;
}

std::vector<std::uint8_t> encode_frame_payload(const FrameEnvelope& frame) {
  const RgbImage& img = frame.image;
  if (img.width() > 0xFFFF || img.height() > 0xFFFF) {
    throw InvalidArgument("frame dimensions exceed the 16-bit wire fields");
  }
  Writer w(kFrameHeaderSize + img.data().size());
  w.u64(frame.frame_id);
  w.u64(frame.timestamp_us);
  w.u16(static_cast<std::uint16_t>(img.width()));
  w.u16(static_cast<std::uint16_t>(img.height()));
  w.u8(kPixelFormatRgb8);
  w.u8(static_cast<std::uint8_t>(frame.eye));
  w.bytes(img.data());
  return w.take();
}

FrameEnvelope decode_frame_payload(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  FrameEnvelope f;
  f.frame_id = r.u64("frame_id");
  f.timestamp_us = r.u64("timestamp_us");
  const int width = r.u16("width");
  const int height = r.u16("height");
  const std::uint8_t format = r.u8("pixel_format");
  if (format != kPixelFormatRgb8) {
    throw DecodeError("pixel_format", "unsupported pixel format " + std::to_string(format));
  }
  const std::uint8_t eye = r.u8("eye");
  if (eye > static_cast<std::uint8_t>(Eye::mono)) throw DecodeError("eye", "invalid eye " + std::to_string(eye));
  f.eye = static_cast<Eye>(eye);
  const std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (r.remaining() != expected) {
    throw DecodeError("pixels", "expected " + std::to_string(expected) + " pixel bytes, got " +
                                    std::to_string(r.remaining()));
  }
  auto pixels = r.take(expected, "pixels");
  f.image = RgbImage(width, height, std::vector<std::uint8_t>(pixels.begin(), pixels.end()));
  return f;
}

std::uint16_t quantize_confidence(double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw ProtocolError("confidence outside [0,1]: " + std::to_string(confidence));
  }
  return static_cast<std::uint16_t>(std::lround(confidence * kConfidenceScale));
}

std::vector<std::uint8_t> encode_result_payload(const ResultPayload& result) {
  if (result.instances.size() > 0xFFFF) throw ProtocolError("more than 65535 instances in one result");
  Writer w(kResultHeaderSize + result.instances.size() * 64);
  w.u64(result.frame_id);
  w.u32(result.inference_us);
  w.u16(static_cast<std::uint16_t>(result.instances.size()));
  for (const AffordanceInstance& inst : result.instances) {
    if (inst.class_id < 0 || inst.class_id > 0xFF) {
      throw ProtocolError("class id does not fit the wire field: " + std::to_string(inst.class_id));
    }
    if (inst.shape.rings.empty() || inst.shape.rings.size() > 0xFF) {
      throw ProtocolError("instance ring count must be in [1,255]");
    }
    w.u8(static_cast<std::uint8_t>(inst.class_id));
    w.u8(static_cast<std::uint8_t>(inst.role));
    w.u16(quantize_confidence(inst.confidence));
    w.u8(static_cast<std::uint8_t>(inst.shape.rings.size()));
    for (const Ring& ring : inst.shape.rings) {
      if (ring.size() > 0xFFFF) throw ProtocolError("more than 65535 vertices in one ring");
      if (ring.size() < 3) throw ProtocolError("ring with fewer than 3 vertices");
      w.u16(static_cast<std::uint16_t>(ring.size()));
      for (const Point& p : ring) {
        w.u16(wire_coordinate(p.x));
        w.u16(wire_coordinate(p.y));
      }
    }
  }
  return w.take();
}

ResultPayload decode_result_payload(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  ResultPayload out;
  out.frame_id = r.u64("frame_id");
  out.inference_us = r.u32("inference_us");
  const std::uint16_t count = r.u16("instance_count");
  out.instances.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    AffordanceInstance inst;
    inst.class_id = r.u8("class_id");
    const auto role = role_from_wire(r.u8("role"));
    if (!role) throw DecodeError("role", "invalid role encoding");
    inst.role = *role;
    const std::uint16_t conf = r.u16("confidence");
    if (conf > 10000) throw DecodeError("confidence", "confidence above 1.0");
    inst.confidence = conf / kConfidenceScale;
    const std::uint8_t rings = r.u8("ring_count");
    if (rings == 0) throw DecodeError("ring_count", "instance without rings");
    for (std::uint8_t k = 0; k < rings; ++k) {
      const std::uint16_t n = r.u16("vertex_count");
      if (n < 3) throw DecodeError("vertex_count", "ring with fewer than 3 vertices");
      Ring ring;
      ring.reserve(n);
      for (std::uint16_t v = 0; v < n; ++v) {
        const double x = r.u16("vertex");
        const double y = r.u16("vertex");
        ring.push_back({x, y});
      }
      inst.shape.rings.push_back(std::move(ring));
    }
    out.instances.push_back(std::move(inst));
  }
  r.expect_end("result");
  return out;
}

std::vector<std::uint8_t> encode_error_payload(const ErrorPayload& error) {
  const std::size_t n = std::min<std::size_t>(error.message.size(), 0xFFFF);
  Writer w(12 + n);
  w.u16(error.code);
  w.u64(error.frame_id);
  w.u16(static_cast<std::uint16_t>(n));
  w.bytes({reinterpret_cast<const std::uint8_t*>(error.message.data()), n});
  return w.take();
}

ErrorPayload decode_error_payload(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  ErrorPayload e;
  e.code = r.u16("code");
  e.frame_id = r.u64("frame_id");
  const std::uint16_t n = r.u16("message_length");
  auto text = r.take(n, "message");
  e.message.assign(text.begin(), text.end());
  r.expect_end("error");
  return e;
}

WireMessage hello_message(std::uint8_t version) { return {MessageKind::hello, encode_hello_payload(version)}; }
WireMessage frame_message(const FrameEnvelope& frame) { return {MessageKind::frame, encode_frame_payload(frame)}; }
WireMessage result_message(const ResultPayload& result) {
  return {MessageKind::result, encode_result_payload(result)};
}
WireMessage error_message(const ErrorPayload& error) { return {MessageKind::error, encode_error_payload(error)}; }

}  // namespace cookar::wire
