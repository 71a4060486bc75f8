#include "cookar/remote.hpp"

#include "cookar/error.hpp"
#include "cookar/log.hpp"
#include "cookar/session.hpp"

namespace cookar {

std::unique_ptr<RemoteClient> RemoteClient::connect(const Endpoint& endpoint, RemoteOptions options) {
  return std::make_unique<RemoteClient>(connect_tcp(endpoint, options.connect_timeout), options);
}

RemoteClient::RemoteClient(std::unique_ptr<ByteStream> stream, RemoteOptions options)
    : stream_(std::move(stream)), options_(options) {
  if (!stream_) throw InvalidArgument("remote client needs a stream");
  handshake(*stream_, Side::client, options_.connect_timeout);
  reader_ = std::thread([this] { reader_loop(); });
}

RemoteClient::~RemoteClient() {
  close();
  if (reader_.joinable()) reader_.join();
}

void RemoteClient::close() noexcept { stream_->close(); }

void RemoteClient::fail_all(const std::exception_ptr& error) {
  std::lock_guard lock(pending_mutex_);
  if (!broken_) broken_ = error;
  for (auto& [id, promise] : pending_) promise.set_exception(error);
  pending_.clear();
}

void RemoteClient::reader_loop() {
  for (;;) {
    std::optional<wire::WireMessage> msg;
    try {
      msg = read_message(*stream_);
    } catch (...) {
      fail_all(std::current_exception());
      return;
    }
    if (!msg) {
      fail_all(std::make_exception_ptr(TransportError("server closed the connection")));
      return;
    }
    try {
      if (msg->kind == wire::MessageKind::result) {
        wire::ResultPayload r = wire::decode_result_payload(msg->payload);
        std::lock_guard lock(pending_mutex_);
        auto it = pending_.find(r.frame_id);
        if (it == pending_.end()) {
          log().warn("remote: RESULT for unknown frame {}", r.frame_id);
          continue;
        }
        it->second.set_value({r.frame_id, r.inference_us, std::move(r.instances)});
        pending_.erase(it);
      } else if (msg->kind == wire::MessageKind::error) {
        const wire::ErrorPayload e = wire::decode_error_payload(msg->payload);
        auto error = std::make_exception_ptr(RemoteError(e.code, e.frame_id, e.message));
        if (e.frame_id == wire::kNoFrame) {
          fail_all(error);
          stream_->close();
          return;
        }
        std::lock_guard lock(pending_mutex_);
        if (auto it = pending_.find(e.frame_id); it != pending_.end()) {
          it->second.set_exception(error);
          pending_.erase(it);
        }
      } else {
        throw ProtocolError("unexpected message kind from server");
      }
    } catch (...) {
      fail_all(std::current_exception());
      stream_->close();
      return;
    }
  }
}

std::future<SegmentResult> RemoteClient::submit(const FrameEnvelope& frame) {
  const wire::WireMessage msg = wire::frame_message(frame);
  std::future<SegmentResult> fut;
  {
    std::lock_guard lock(pending_mutex_);
    if (broken_) std::rethrow_exception(broken_);
    if (pending_.contains(frame.frame_id)) {
      throw InvalidArgument("frame " + std::to_string(frame.frame_id) + " is already in flight");
    }
    fut = pending_[frame.frame_id].get_future();
  }
  try {
    std::lock_guard lock(write_mutex_);
    write_message(*stream_, msg);
  } catch (...) {
    std::lock_guard lock(pending_mutex_);
    pending_.erase(frame.frame_id);
    throw;
  }
  return fut;
}

SegmentResult RemoteClient::wait(std::uint64_t frame_id, std::future<SegmentResult>& pending) {
  if (pending.wait_for(options_.timeout) != std::future_status::ready) {
    {
      std::lock_guard lock(pending_mutex_);
      pending_.erase(frame_id);
    }
    throw TimeoutError("no RESULT for frame " + std::to_string(frame_id) + " within " +
                       std::to_string(options_.timeout.count()) + " ms");
  }
  return pending.get();
}

SegmentResult RemoteClient::segment(const FrameEnvelope& frame) {
  auto fut = submit(frame);
  return wait(frame.frame_id, fut);
}

}  // namespace cookar
