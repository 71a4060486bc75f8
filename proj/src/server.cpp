#include "cookar/server.hpp"

#include <limits>

#include "cookar/error.hpp"
#include "cookar/log.hpp"
#include "cookar/session.hpp"

namespace cookar {

namespace {

void send_error(ByteStream& stream, std::uint16_t code, std::uint64_t frame_id, const std::string& message) {
  try {
    write_message(stream, wire::error_message({code, frame_id, message}));
  } catch (const Error& e) {
    log().debug("serve: could not deliver ERROR: {}", e.what());
  }
}

}  // namespace

SegmentationServer::SegmentationServer(std::shared_ptr<SegmentationProvider> provider, ServeConfig config)
    : provider_(std::move(provider)), config_(std::move(config)) {
  if (!provider_) throw InvalidArgument("serve: provider is required");
  if (!(config_.confidence_threshold >= 0.0 && config_.confidence_threshold <= 1.0)) {
    throw InvalidArgument("serve: confidence threshold must be in [0,1]");
  }
}

SegmentationServer::~SegmentationServer() { stop(); }

std::uint16_t SegmentationServer::start() {
  if (running_) return port_;
  listener_ = std::make_unique<TcpListener>(config_.endpoint);
  port_ = listener_->port();
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  log().info("serve: listening on {}:{}", config_.endpoint.host, port_);
  return port_;
}

void SegmentationServer::stop() {
  if (!running_.exchange(false)) return;
  listener_->close();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::unique_ptr<Session>> sessions;
  {
    std::lock_guard lock(sessions_mutex_);
    sessions.swap(sessions_);
  }
  for (auto& s : sessions) s->stream->close();
  for (auto& s : sessions) {
    if (s->thread.joinable()) s->thread.join();
  }
}

void SegmentationServer::reap_finished() {
  std::lock_guard lock(sessions_mutex_);
  std::erase_if(sessions_, [](std::unique_ptr<Session>& s) {
    if (!s->done) return false;
    if (s->thread.joinable()) s->thread.join();
    return true;
  });
}

void SegmentationServer::accept_loop() {
  while (running_) {
    std::unique_ptr<SocketStream> stream;
    try {
      stream = listener_->accept();
    } catch (const Error& e) {
      log().error("serve: accept failed: {}", e.what());
      continue;
    }
    if (!stream) break;
    reap_finished();
    auto session = std::make_unique<Session>();
    session->stream = std::move(stream);
    Session* raw = session.get();
    ++sessions_started_;
    raw->thread = std::thread([this, raw] {
      serve_stream(*raw->stream);
      raw->stream->close();
      raw->done = true;
    });
    std::lock_guard lock(sessions_mutex_);
    sessions_.push_back(std::move(session));
  }
}

void SegmentationServer::serve_stream(ByteStream& stream) {
  try {
    handshake(stream, Side::server, config_.handshake_timeout);
  } catch (const ProtocolError& e) {
    log().warn("serve: handshake rejected: {}", e.what());
    send_error(stream, wire::kErrorVersion, wire::kNoFrame, e.what());
    return;
  } catch (const Error& e) {
    log().warn("serve: handshake failed: {}", e.what());
    return;
  }

  for (;;) {
    std::optional<wire::WireMessage> msg;
    try {
      msg = read_message(stream);
    } catch (const ProtocolError& e) {
      send_error(stream, wire::kErrorMalformed, wire::kNoFrame, e.what());
      return;
    } catch (const Error& e) {
      log().debug("serve: session ended: {}", e.what());
      return;
    }
    if (!msg) return;

    if (msg->kind != wire::MessageKind::frame) {
      send_error(stream, wire::kErrorUnexpected, wire::kNoFrame, "unexpected message kind from client");
      return;
    }

    FrameEnvelope frame;
    try {
      frame = wire::decode_frame_payload(msg->payload);
    } catch (const ProtocolError& e) {
      send_error(stream, wire::kErrorMalformed, wire::kNoFrame, e.what());
      return;
    }

    std::vector<AffordanceInstance> instances;
    const auto start = std::chrono::steady_clock::now();
    try {
      if (provider_->concurrent_safe()) {
        instances = provider_->segment(frame);
      } else {
        std::lock_guard lock(provider_mutex_);
        instances = provider_->segment(frame);
      }
    } catch (const std::exception& e) {
      log().warn("serve: provider failed on frame {}: {}", frame.frame_id, e.what());
      try {
        write_message(stream, wire::error_message({wire::kErrorProvider, frame.frame_id, e.what()}));
        continue;
      } catch (const Error&) {
        return;
      }
    }
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();

    wire::ResultPayload result;
    result.frame_id = frame.frame_id;
    result.inference_us = static_cast<std::uint32_t>(
        std::min<long long>(elapsed, std::numeric_limits<std::uint32_t>::max()));
    result.instances = apply_threshold(std::move(instances), config_.confidence_threshold);
    try {
      write_message(stream, wire::result_message(result));
    } catch (const ProtocolError& e) {
      // Provider produced something the wire cannot carry.
      try {
        write_message(stream, wire::error_message({wire::kErrorProvider, frame.frame_id, e.what()}));
      } catch (const Error&) {
        return;
      }
    } catch (const Error& e) {
      log().debug("serve: write failed: {}", e.what());
      return;
    }
  }
}

}  // namespace cookar
