#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <random>

#include "cookar/error.hpp"
#include "cookar/session.hpp"
#include "cookar/wire.hpp"

using namespace cookar;
using namespace cookar::wire;

namespace {

using Bytes = std::vector<std::uint8_t>;

/// In-memory stream that hands out reads in fixed chunk sizes.
class ChunkedStream final : public ByteStream {
 public:
  ChunkedStream(Bytes data, std::vector<std::size_t> cuts) : data_(std::move(data)), cuts_(std::move(cuts)) {}
  std::size_t read_some(std::span<std::uint8_t> buf) override {
    if (pos_ >= data_.size()) return 0;
    std::size_t end = data_.size();
    while (next_cut_ < cuts_.size() && cuts_[next_cut_] <= pos_) ++next_cut_;
    if (next_cut_ < cuts_.size()) end = cuts_[next_cut_];
    const std::size_t n = std::min(buf.size(), end - pos_);
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), n, buf.begin());
    pos_ += n;
    return n;
  }
  void write_all(std::span<const std::uint8_t> d) override { written.insert(written.end(), d.begin(), d.end()); }
  void close() noexcept override {}
  Bytes written;

 private:
  Bytes data_;
  std::vector<std::size_t> cuts_;
  std::size_t pos_ = 0;
  std::size_t next_cut_ = 0;
};

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

FrameEnvelope random_frame(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 12);
  std::uniform_int_distribution<int> byte(0, 255);
  FrameEnvelope f;
  f.frame_id = rng();
  f.timestamp_us = rng();
  f.eye = static_cast<Eye>(rng() % 3);
  const int w = dim(rng), h = dim(rng);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w * h * 3));
  for (auto& p : px) p = static_cast<std::uint8_t>(byte(rng));
  f.image = RgbImage(w, h, std::move(px));
  return f;
}

ResultPayload random_result(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 6), rings(1, 3), verts(3, 10), coord(0, 65535), conf(0, 10000);
  ResultPayload r;
  r.frame_id = rng();
  r.inference_us = static_cast<std::uint32_t>(rng());
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    AffordanceInstance inst;
    inst.class_id = rng() % 5 == 0 ? kUnknownClass : static_cast<int>(rng() % 18);
    inst.role = static_cast<Role>(rng() % kRoleCount);
    inst.confidence = conf(rng) / 10000.0;
    const int nr = rings(rng);
    for (int k = 0; k < nr; ++k) {
      Ring ring;
      const int nv = verts(rng);
      for (int v = 0; v < nv; ++v) ring.push_back({double(coord(rng)), double(coord(rng))});
      inst.shape.rings.push_back(ring);
    }
    r.instances.push_back(inst);
  }
  return r;
}

bool same_frame(const FrameEnvelope& a, const FrameEnvelope& b) {
  return a.frame_id == b.frame_id && a.timestamp_us == b.timestamp_us && a.eye == b.eye && a.image == b.image;
}

}  // namespace

TEST(Wire, HelloBytes) {
  const Bytes expected = {0x00, 0x00, 0x00, 0x06, 0x00, 0x43, 0x4B, 0x41, 0x52, 0x01};
  EXPECT_EQ(encode_message(hello_message()), expected);
  const auto m = decode_message(expected);
  EXPECT_EQ(m.kind, MessageKind::hello);
  EXPECT_EQ(decode_hello_payload(m.payload).version, 1);
}

TEST(Wire, FrameLayout) {
  FrameEnvelope f;
  f.frame_id = 7;
  f.eye = Eye::left;
  f.image = RgbImage(2, 1, std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6});
  const Bytes bytes = encode_message(frame_message(f));
  EXPECT_EQ(bytes.size(), 33u);
  EXPECT_EQ(bytes[3], 29);  // kind + 22 + 6
  EXPECT_EQ(bytes[4], 0x01);
  EXPECT_EQ(bytes[12], 7);  // frame_id low byte, big-endian
}

TEST(Wire, FrameDecodeErrorsNameTheField) {
  FrameEnvelope f;
  f.image = RgbImage(2, 2);
  Bytes payload = encode_frame_payload(f);
  Bytes bad_format = payload;
  bad_format[20] = 9;
  try {
    decode_frame_payload(bad_format);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.field(), "pixel_format");
  }
  Bytes short_pixels(payload.begin(), payload.end() - 1);
  try {
    decode_frame_payload(short_pixels);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.field(), "pixels");
  }
  Bytes long_pixels = payload;
  long_pixels.push_back(0);
  EXPECT_THROW(decode_frame_payload(long_pixels), DecodeError);
  EXPECT_THROW(decode_frame_payload(Bytes(10)), DecodeError);
}

TEST(Wire, ResultLayout) {
  ResultPayload empty{1, 0, {}};
  EXPECT_EQ(encode_result_payload(empty).size(), 14u);
  EXPECT_EQ(quantize_confidence(0.4), 0x0FA0);
  EXPECT_EQ(quantize_confidence(1.0), 10000);
  EXPECT_EQ(quantize_confidence(0.0), 0);
}

TEST(Wire, ResultRoundsToWirePrecision) {
  AffordanceInstance inst{3, Role::hazardous, 0.123456, Polygon{{{{1.4, 2.6}, {10.5, 3.2}, {4, 9.49}}}}};
  const auto back = decode_result_payload(encode_result_payload({5, 9, {inst}}));
  ASSERT_EQ(back.instances.size(), 1u);
  EXPECT_DOUBLE_EQ(back.instances[0].confidence, 0.1235);
  EXPECT_EQ(back.instances[0].shape, (Polygon{{{{1, 3}, {11, 3}, {4, 9}}}}));
}

TEST(Wire, ResultEncodeErrors) {
  AffordanceInstance inst{3, Role::hazardous, 0.5, Polygon{{{{1, 2}, {70000, 3}, {4, 9}}}}};
  EXPECT_THROW(encode_result_payload({1, 0, {inst}}), ProtocolError);
  inst.shape = Polygon{{{{1, 2}, {-3, 3}, {4, 9}}}};
  EXPECT_THROW(encode_result_payload({1, 0, {inst}}), ProtocolError);
  inst.shape = Polygon{{{{1, 2}, {3, 3}, {4, 9}}}};
  inst.confidence = 1.5;
  EXPECT_THROW(encode_result_payload({1, 0, {inst}}), ProtocolError);
  inst.confidence = 0.5;
  inst.shape.rings[0].resize(70000, Point{1, 1});
  EXPECT_THROW(encode_result_payload({1, 0, {inst}}), ProtocolError);
}

TEST(Wire, ResultDecodeErrorsNameTheField) {
  AffordanceInstance inst{3, Role::hazardous, 0.5, Polygon{{{{1, 2}, {3, 3}, {4, 9}}}}};
  Bytes p = encode_result_payload({1, 0, {inst}});
  Bytes bad_role = p;
  bad_role[15] = 42;
  try {
    decode_result_payload(bad_role);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.field(), "role");
  }
  Bytes bad_conf = p;
  bad_conf[16] = 0xFF;
  try {
    decode_result_payload(bad_conf);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.field(), "confidence");
  }
  for (std::size_t cut = 0; cut < p.size(); ++cut)
    EXPECT_THROW(decode_result_payload(std::span(p.data(), cut)), DecodeError) << cut;
}

TEST(Wire, RoundTripProperty) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1500; ++i) {
    switch (i % 4) {
      case 0: {
        const auto f = random_frame(rng);
        const Bytes b = encode_message(frame_message(f));
        const auto m = decode_message(b);
        ASSERT_EQ(m.kind, MessageKind::frame);
        const auto back = decode_frame_payload(m.payload);
        ASSERT_TRUE(same_frame(back, f));
        ASSERT_EQ(encode_message(frame_message(back)), b);
        break;
      }
      case 1: {
        const auto r = random_result(rng);
        const Bytes b = encode_message(result_message(r));
        const auto back = decode_result_payload(decode_message(b).payload);
        ASSERT_EQ(back, r);
        ASSERT_EQ(encode_message(result_message(back)), b);
        break;
      }
      case 2: {
        ErrorPayload e{static_cast<std::uint16_t>(rng()), rng(), std::string(rng() % 40, 'x')};
        const Bytes b = encode_message(error_message(e));
        ASSERT_EQ(decode_error_payload(decode_message(b).payload), e);
        break;
      }
      default: {
        const auto v = static_cast<std::uint8_t>(rng());
        const auto back = decode_hello_payload(decode_message(encode_message(hello_message(v))).payload);
        ASSERT_EQ(back.version, v);
      }
    }
  }
}

TEST(Wire, GoldenFixtureDecodes) {
  const Bytes golden = read_file(std::string(COOKAR_FIXTURE_DIR) + "/wire_golden.bin");
  ASSERT_FALSE(golden.empty());
  ChunkedStream stream(golden, {});
  std::vector<WireMessage> messages;
  while (auto m = read_message(stream)) messages.push_back(*m);
  ASSERT_EQ(messages.size(), 4u);

  ASSERT_EQ(messages[0].kind, MessageKind::hello);
  EXPECT_EQ(decode_hello_payload(messages[0].payload).version, 1);

  ASSERT_EQ(messages[1].kind, MessageKind::frame);
  const auto frame = decode_frame_payload(messages[1].payload);
  EXPECT_EQ(frame.frame_id, 7u);
  EXPECT_EQ(frame.timestamp_us, 123456789u);
  EXPECT_EQ(frame.eye, Eye::left);
  EXPECT_EQ(frame.image, RgbImage(2, 1, std::vector<std::uint8_t>{0x3B, 0xE8, 0xB0, 0xFC, 0x62, 0x6A}));

  ASSERT_EQ(messages[2].kind, MessageKind::result);
  const auto result = decode_result_payload(messages[2].payload);
  ResultPayload expected{7, 15950, {}};
  expected.instances.push_back({1, Role::grabbable, 0.9876, Polygon{{{{10, 20}, {50, 20}, {50, 60}, {10, 60}}}}});
  expected.instances.push_back(
      {kUnknownClass, Role::hazardous, 0.4,
       Polygon{{{{100, 100}, {200, 100}, {200, 180}, {100, 180}}, {{120, 120}, {160, 120}, {140, 160}}}}});
  EXPECT_EQ(result, expected);

  ASSERT_EQ(messages[3].kind, MessageKind::error);
  EXPECT_EQ(decode_error_payload(messages[3].payload), (ErrorPayload{500, 7, "provider failed"}));

  // Encoder reproduces the fixture byte for byte.
  Bytes again;
  for (const auto& m : {hello_message(), frame_message(frame), result_message(expected),
                        error_message({500, 7, "provider failed"})}) {
    const auto b = encode_message(m);
    again.insert(again.end(), b.begin(), b.end());
  }
  EXPECT_EQ(again, golden);
}

TEST(Wire, RechunkingAtEveryOffsetPreservesBoundaries) {
  std::mt19937_64 rng(77);
  Bytes stream_bytes;
  std::vector<WireMessage> sent;
  for (int i = 0; i < 6; ++i) {
    WireMessage m = i % 2 ? result_message(random_result(rng)) : frame_message(random_frame(rng));
    const auto b = encode_message(m);
    stream_bytes.insert(stream_bytes.end(), b.begin(), b.end());
    sent.push_back(m);
  }
  for (std::size_t cut = 1; cut < stream_bytes.size(); ++cut) {
    ChunkedStream s(stream_bytes, {cut});
    std::vector<WireMessage> got;
    while (auto m = read_message(s)) got.push_back(*m);
    ASSERT_EQ(got, sent) << "cut at " << cut;
  }
  // One byte per read.
  std::vector<std::size_t> every(stream_bytes.size());
  for (std::size_t i = 0; i < every.size(); ++i) every[i] = i + 1;
  ChunkedStream s(stream_bytes, every);
  std::vector<WireMessage> got;
  while (auto m = read_message(s)) got.push_back(*m);
  EXPECT_EQ(got, sent);
}

TEST(Wire, ReadMessageLimits) {
  ChunkedStream huge(Bytes{0x7F, 0xFF, 0xFF, 0xFF, 0x01}, {});
  EXPECT_THROW(read_message(huge), ProtocolError);
  ChunkedStream zero(Bytes{0, 0, 0, 0}, {});
  EXPECT_THROW(read_message(zero), ProtocolError);
  ChunkedStream unknown(Bytes{0, 0, 0, 1, 0x09}, {});
  EXPECT_THROW(read_message(unknown), DecodeError);
  ChunkedStream truncated(Bytes{0, 0, 0, 6, 0, 'C', 'K'}, {});
  EXPECT_THROW(read_message(truncated), TransportError);
  ChunkedStream empty(Bytes{}, {});
  EXPECT_FALSE(read_message(empty));
  WireMessage big{MessageKind::frame, Bytes(kMaxMessageLength)};
  EXPECT_THROW(encode_message(big), ProtocolError);
}

TEST(Wire, HelloMagicChecked) {
  Bytes p = encode_hello_payload();
  p[0] = 'X';
  EXPECT_THROW(decode_hello_payload(p), ProtocolError);
}
