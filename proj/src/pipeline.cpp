#include "cookar/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "cookar/bounded_queue.hpp"
#include "cookar/compositor.hpp"
#include "cookar/error.hpp"
#include "cookar/image_io.hpp"
#include "cookar/log.hpp"
#include "cookar/replay.hpp"
#include "cookar/wire.hpp"

namespace cookar {

namespace fs = std::filesystem;

SyntheticSource::SyntheticSource(SceneSpec spec, std::size_t count) : spec_(std::move(spec)), count_(count) {
  spec_.validate();
}

std::optional<SourceFrame> SyntheticSource::next() {
  if (next_ >= count_) return std::nullopt;
  const std::uint64_t id = next_++;
  Scene scene = oracle_scene(spec_.for_frame(id));
  SourceFrame out;
  out.frame.frame_id = id;
  out.frame.image = std::move(scene.left);
  out.frame.depth_mm = std::move(scene.depth_mm);
  out.right = std::move(scene.right);
  return out;
}

namespace {
bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

DirectorySource::DirectorySource(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && ends_with(name, ".png") && !ends_with(name, "_r.png")) files_.push_back(entry.path());
  }
  std::sort(files_.begin(), files_.end());
}

std::optional<SourceFrame> DirectorySource::next() {
  if (next_ >= files_.size()) return std::nullopt;
  const auto& path = files_[next_];
  SourceFrame out;
  out.frame.frame_id = next_++;
  out.frame.image = read_png(path);
  auto right = path;
  right.replace_filename(path.stem().string() + "_r.png");
  if (fs::exists(right)) out.right = read_png(right);
  auto depth = path;
  depth.replace_extension(".pgm");
  if (fs::exists(depth)) out.frame.depth_mm = read_depth_pgm(depth);
  return out;
}

ReplaySource::ReplaySource(const AnnotationSet& annotations, fs::path image_dir)
    : images_(annotations.images), dir_(std::move(image_dir)) {
  std::sort(images_.begin(), images_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
}

std::optional<SourceFrame> ReplaySource::next() {
  if (next_ >= images_.size()) return std::nullopt;
  const auto& record = images_[next_++];
  SourceFrame out;
  out.frame.frame_id = static_cast<std::uint64_t>(record.id);
  out.frame.image = read_png(dir_ / record.file_name);
  return out;
}

std::string frame_file_name(std::uint64_t frame_id, bool right) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "frame_%06llu%s.png", static_cast<unsigned long long>(frame_id), right ? "_r" : "");
  return buf;
}

PngDirectorySink::PngDirectorySink(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void PngDirectorySink::present(const PresentedFrame& frame) {
  write_png(frame.left, dir_ / frame_file_name(frame.frame_id));
  if (frame.right) write_png(*frame.right, dir_ / frame_file_name(frame.frame_id, true));
}

namespace {

using Clock = std::chrono::steady_clock;

struct Work {
  std::size_t seq = 0;
  std::int64_t start_us = 0;
  SourceFrame src;
  FrameEnvelope wire_frame;
  std::future<SegmentResult> pending;
  Clock::time_point sent_at;
  std::uint32_t inference_us = 0;
  std::int64_t carried_back_us = 0;
  std::vector<AffordanceInstance> instances;
  PresentedFrame out;
};

class Runner {
 public:
  Runner(FrameSource& source, SegmentationProvider* provider, RemoteClient* client, FrameSink& sink,
         const PipelineOptions& options)
      : source_(source), provider_(provider), client_(client), sink_(sink), options_(options), epoch_(Clock::now()) {}

  RunResult run() {
    if (options_.mode == RunMode::serial)
      run_serial();
    else
      run_pipelined();

    const std::set<std::uint64_t> shown(result_.presented_ids.begin(), result_.presented_ids.end());
    std::vector<StageTiming> kept;
    for (auto& t : profiler_.timings())
      if (shown.count(t.frame_id)) kept.push_back(std::move(t));
    result_.report = latency_report(kept, options_.mode, result_.dropped);
    result_.report.complete = !result_.error.has_value();
    return std::move(result_);
  }

 private:
  std::int64_t now_us() const {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - epoch_).count();
  }

  template <typename F>
  void timed(const Work& w, Stage stage, F&& body, std::int64_t extra_us = 0) {
    const auto start = Clock::now();
    body();
    sleep_until_elapsed(start, options_.delays[static_cast<std::size_t>(stage)]);
    const auto took = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
    profiler_.record_stage(w.src.frame.frame_id, stage, took + extra_us);
  }

  std::optional<Work> capture() {
    if (options_.duration && Clock::now() - epoch_ >= *options_.duration) return std::nullopt;
    Work w;
    const auto start = Clock::now();
    w.start_us = now_us();
    auto frame = source_.next();
    if (!frame) return std::nullopt;
    w.src = std::move(*frame);
    w.src.frame.timestamp_us = static_cast<std::uint64_t>(w.start_us);
    w.seq = sourced_++;
    sleep_until_elapsed(start, options_.delays[0]);
    const auto took = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
    profiler_.record_stage(w.src.frame.frame_id, Stage::capture, took);
    return w;
  }

  void send(Work& w) {
    timed(w, Stage::stream_to_server, [&] {
      if (client_) {
        w.pending = client_->submit(w.src.frame);
        w.sent_at = Clock::now();
      } else {
        const auto bytes = wire::encode_message(wire::frame_message(w.src.frame));
        const auto message = wire::decode_message(bytes);
        w.wire_frame = wire::decode_frame_payload(message.payload);
      }
    });
  }

  void infer(Work& w) {
    if (client_) {
      SegmentResult result = client_->wait(w.src.frame.frame_id, w.pending);
      const auto round_trip = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - w.sent_at).count();
      w.inference_us = result.inference_us;
      w.carried_back_us = std::max<std::int64_t>(0, round_trip - result.inference_us);
      w.instances = std::move(result.instances);
      profiler_.record_stage(w.src.frame.frame_id, Stage::inference, result.inference_us);
      return;
    }
    const auto start = Clock::now();
    timed(w, Stage::inference, [&] {
      std::vector<AffordanceInstance> raw;
      if (provider_->concurrent_safe()) {
        raw = provider_->segment(w.wire_frame);
      } else {
        std::lock_guard lock(provider_mutex_);
        raw = provider_->segment(w.wire_frame);
      }
      w.instances = apply_threshold(std::move(raw), options_.confidence_threshold);
    });
    w.inference_us = static_cast<std::uint32_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count());
  }

  void receive(Work& w) {
    timed(
        w, Stage::stream_back,
        [&] {
          if (client_) return;
          wire::ResultPayload payload{w.src.frame.frame_id, w.inference_us, std::move(w.instances)};
          const auto bytes = wire::encode_message(wire::result_message(payload));
          w.instances = wire::decode_result_payload(wire::decode_message(bytes).payload).instances;
        },
        w.carried_back_us);
  }

  void render(Work& w) {
    timed(w, Stage::render, [&] {
      const FrameEnvelope& frame = w.src.frame;
      const DepthMap* depth = frame.depth_mm ? &*frame.depth_mm : nullptr;
      w.out.frame_id = frame.frame_id;
      w.out.left = composite(frame.image, w.instances, options_.style, depth);
      if (options_.stereo.enabled) {
        const RgbImage& base = w.src.right ? *w.src.right : frame.image;
        const DepthMap none(frame.image.width(), frame.image.height());
        w.out.right = composite_right(base, w.instances, options_.style, depth ? *depth : none,
                                      options_.stereo.focal_px, options_.stereo.baseline_m);
      }
      w.out.source_left = frame.image;
      w.out.instances = w.instances;
    });
  }

  void present(Work& w) {
    sink_.present(w.out);
    profiler_.record_frame(w.src.frame.frame_id, w.start_us, now_us());
    result_.presented_ids.push_back(w.src.frame.frame_id);
    ++result_.presented;
  }

  void fail(const std::exception& e) {
    std::lock_guard lock(error_mutex_);
    if (!result_.error) {
      result_.error = e.what();
      log().error("run aborted: {}", e.what());
    }
  }

  void run_serial() {
    try {
      while (auto w = capture()) {
        send(*w);
        infer(*w);
        receive(*w);
        render(*w);
        present(*w);
      }
    } catch (const std::exception& e) {
      fail(e);
    }
    result_.sourced = sourced_;
  }

  void run_pipelined() {
    const std::size_t cap = options_.queue_capacity;
    BoundedQueue<Work> captured(cap), sent(cap), inferred(cap), received(cap), rendered(cap);
    std::vector<BoundedQueue<Work>*> all{&captured, &sent, &inferred, &received, &rendered};
    auto abort_all = [&](const std::exception& e) {
      fail(e);
      for (auto* q : all) q->abort();
    };
    auto stage_worker = [&](BoundedQueue<Work>& in, BoundedQueue<Work>& out, auto step) {
      return [&in, &out, step, &abort_all, this] {
        try {
          while (auto w = in.pop()) {
            step(*w);
            if (!out.push(std::move(*w))) return;
          }
        } catch (const std::exception& e) {
          abort_all(e);
        }
        out.close();
      };
    };

    std::vector<std::thread> workers;
    workers.emplace_back([&] {
      try {
        while (auto w = capture())
          if (!captured.push(std::move(*w))) break;
      } catch (const std::exception& e) {
        abort_all(e);
      }
      captured.close();
    });
    workers.emplace_back(stage_worker(captured, sent, [this](Work& w) { send(w); }));

    const std::size_t n_infer = std::max<std::size_t>(1, options_.inference_workers);
    std::atomic<std::size_t> infer_left{n_infer};
    for (std::size_t i = 0; i < n_infer; ++i) {
      workers.emplace_back([&] {
        try {
          while (auto w = sent.pop()) {
            infer(*w);
            if (!inferred.push(std::move(*w))) break;
          }
        } catch (const std::exception& e) {
          abort_all(e);
        }
        if (--infer_left == 0) inferred.close();
      });
    }
    workers.emplace_back(stage_worker(inferred, received, [this](Work& w) { receive(w); }));
    workers.emplace_back(stage_worker(received, rendered, [this](Work& w) { render(w); }));

    // Presenter on the calling thread.
    std::map<std::size_t, Work> waiting;
    std::size_t next_seq = 0;
    std::optional<std::size_t> last_seq;
    try {
      while (auto w = rendered.pop()) {
        if (options_.drop_policy == DropPolicy::drop_late) {
          if (last_seq && w->seq < *last_seq) {
            ++result_.dropped;
            log().debug("dropped late frame {}", w->src.frame.frame_id);
            continue;
          }
          last_seq = w->seq;
          present(*w);
        } else {
          const std::size_t seq = w->seq;
          waiting.emplace(seq, std::move(*w));
          for (auto it = waiting.find(next_seq); it != waiting.end(); it = waiting.find(next_seq)) {
            present(it->second);
            waiting.erase(it);
            ++next_seq;
          }
        }
      }
    } catch (const std::exception& e) {
      abort_all(e);
    }
    for (auto& t : workers) t.join();
    result_.sourced = sourced_;
  }

  FrameSource& source_;
  SegmentationProvider* provider_;
  RemoteClient* client_;
  FrameSink& sink_;
  const PipelineOptions& options_;
  Clock::time_point epoch_;
  LatencyProfiler profiler_;
  std::mutex provider_mutex_;
  std::mutex error_mutex_;
  std::atomic<std::size_t> sourced_{0};
  RunResult result_;
};

void check_options(const PipelineOptions& options) {
  options.style.validate();
  if (options.stereo.enabled && !(options.stereo.focal_px > 0 && options.stereo.baseline_m > 0))
    throw ConfigError("stereo focal length and baseline must be positive");
  if (!(options.confidence_threshold >= 0.0 && options.confidence_threshold <= 1.0))
    throw ConfigError("confidence threshold must be in [0, 1]");
  if (options.queue_capacity == 0) throw ConfigError("queue capacity must be at least 1");
  if (options.inference_workers == 0) throw ConfigError("inference workers must be at least 1");
  for (auto d : options.delays)
    if (d.count() < 0) throw ConfigError("stage delays must be non-negative");
}

}  // namespace

RunResult run_pipeline(FrameSource& source, SegmentationProvider& provider, FrameSink& sink,
                       const PipelineOptions& options) {
  check_options(options);
  return Runner(source, &provider, nullptr, sink, options).run();
}

RunResult run_pipeline(FrameSource& source, RemoteClient& client, FrameSink& sink, const PipelineOptions& options) {
  check_options(options);
  return Runner(source, nullptr, &client, sink, options).run();
}

void RunConfig::validate() const {
  check_options(pipeline);
  if (const auto* s = std::get_if<SyntheticSourceConfig>(&source)) {
    s->scene.validate();
    if (s->frames == 0 && !pipeline.duration) throw ConfigError("synthetic source needs at least one frame");
  }
  if (backend == BackendKind::inproc && std::holds_alternative<DirectorySourceConfig>(source) &&
      !std::get<DirectorySourceConfig>(source).annotations)
    throw ConfigError("an image directory with the in-process backend needs an annotation file to replay");
}

RunResult run(const RunConfig& config, FrameSink& sink) {
  config.validate();

  std::unique_ptr<FrameSource> source;
  std::unique_ptr<SegmentationProvider> provider;
  std::optional<AnnotationSet> annotations;

  if (const auto* s = std::get_if<SyntheticSourceConfig>(&config.source)) {
    // A duration-bounded run keeps generating frames until time is up.
    const std::size_t count = config.pipeline.duration && s->frames == 0 ? SIZE_MAX : s->frames;
    source = std::make_unique<SyntheticSource>(s->scene, count);
    provider = std::make_unique<OracleBackend>(s->scene);
  } else if (const auto* d = std::get_if<DirectorySourceConfig>(&config.source)) {
    auto dir = std::make_unique<DirectorySource>(d->dir);
    if (dir->size() == 0) throw ConfigError("no PNG frames in " + d->dir.string());
    source = std::move(dir);
    if (d->annotations) annotations = load_annotations(*d->annotations);
  } else {
    const auto& r = std::get<ReplaySourceConfig>(config.source);
    annotations = load_annotations(r.annotations);
    if (annotations->images.empty()) throw ConfigError("annotation file lists no images");
    source = std::make_unique<ReplaySource>(*annotations, r.image_dir);
  }
  if (annotations) provider = std::make_unique<ReplayBackend>(*annotations, config.replay_latency);

  if (config.backend == BackendKind::remote) {
    auto client = RemoteClient::connect(config.endpoint, config.remote);
    auto result = run_pipeline(*source, *client, sink, config.pipeline);
    client->close();
    return result;
  }
  return run_pipeline(*source, *provider, sink, config.pipeline);
}

}  // namespace cookar
