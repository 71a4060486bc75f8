#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cookar/annotations.hpp"
#include "cookar/oracle.hpp"
#include "cookar/profiler.hpp"
#include "cookar/provider.hpp"
#include "cookar/remote.hpp"
#include "cookar/style.hpp"

namespace cookar {

struct SourceFrame {
  FrameEnvelope frame;              ///< left (or mono) view, optional depth
  std::optional<RgbImage> right;    ///< right view when the source has one
};

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  /// Next frame in capture order; nullopt when exhausted.
  virtual std::optional<SourceFrame> next() = 0;
};

/// Frames 0..count-1 of a synthetic scene sequence (spec.for_frame(id)).
class SyntheticSource final : public FrameSource {
 public:
  SyntheticSource(SceneSpec spec, std::size_t count);
  std::optional<SourceFrame> next() override;

 private:
  SceneSpec spec_;
  std::size_t count_;
  std::size_t next_ = 0;
};

/// Every *.png in a directory (name order, excluding *_r.png), frame ids
/// 0,1,... A sibling <stem>_r.png is the right view, <stem>.pgm the depth.
class DirectorySource final : public FrameSource {
 public:
  explicit DirectorySource(const std::filesystem::path& dir);
  std::optional<SourceFrame> next() override;
  std::size_t size() const noexcept { return files_.size(); }

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t next_ = 0;
};

/// Images of an annotation set in id order; frame id = image id.
class ReplaySource final : public FrameSource {
 public:
  ReplaySource(const AnnotationSet& annotations, std::filesystem::path image_dir);
  std::optional<SourceFrame> next() override;

 private:
  std::vector<ImageRecord> images_;
  std::filesystem::path dir_;
  std::size_t next_ = 0;
};

struct PresentedFrame {
  std::uint64_t frame_id = 0;
  RgbImage left;
  std::optional<RgbImage> right;
  RgbImage source_left;
  std::vector<AffordanceInstance> instances;
};

class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void present(const PresentedFrame& frame) = 0;
};

/// Writes frame_{id:06}.png and, in stereo, frame_{id:06}_r.png.
class PngDirectorySink final : public FrameSink {
 public:
  explicit PngDirectorySink(std::filesystem::path dir);
  void present(const PresentedFrame& frame) override;

 private:
  std::filesystem::path dir_;
};

class MemorySink final : public FrameSink {
 public:
  void present(const PresentedFrame& frame) override { frames.push_back(frame); }
  std::vector<PresentedFrame> frames;
};

class NullSink final : public FrameSink {
 public:
  void present(const PresentedFrame&) override {}
};

std::string frame_file_name(std::uint64_t frame_id, bool right = false);

enum class DropPolicy { block, drop_late };

struct StereoConfig {
  bool enabled = false;
  double focal_px = 500.0;
  double baseline_m = 0.063;
};

/// Extra time each stage is held for, measured from the stage start, so a
/// stage takes max(work, delay). The inference delay applies to in-process
/// providers; a remote server reports its own inference time.
using StageDelays = std::array<std::chrono::microseconds, kStageCount>;

enum class BackendKind { inproc, remote };

struct PipelineOptions {
  StyleSpec style = style_preset("cookar-study");
  StereoConfig stereo;
  RunMode mode = RunMode::serial;
  DropPolicy drop_policy = DropPolicy::block;
  StageDelays delays{};
  double confidence_threshold = kDefaultConfidenceThreshold;  ///< in-process only
  std::size_t queue_capacity = 4;
  std::size_t inference_workers = 1;  ///< pipelined, in-process only
  std::optional<std::chrono::milliseconds> duration;  ///< stop capturing after this long
};

struct RunResult {
  LatencyReport report;
  std::size_t sourced = 0;
  std::size_t presented = 0;
  std::size_t dropped = 0;
  std::vector<std::uint64_t> presented_ids;
  std::optional<std::string> error;  ///< set when the run aborted
};

/// Runs frames through an in-process provider. Each frame still crosses the
/// wire encoding both ways, so results match a remote run bit for bit.
RunResult run_pipeline(FrameSource& source, SegmentationProvider& provider, FrameSink& sink,
                       const PipelineOptions& options);

/// Runs frames through a connected remote client.
RunResult run_pipeline(FrameSource& source, RemoteClient& client, FrameSink& sink, const PipelineOptions& options);

struct SyntheticSourceConfig {
  SceneSpec scene;
  std::size_t frames = 50;
};
struct DirectorySourceConfig {
  std::filesystem::path dir;
  std::optional<std::filesystem::path> annotations;  ///< for an in-process replay backend
};
struct ReplaySourceConfig {
  std::filesystem::path annotations;
  std::filesystem::path image_dir;
};

struct RunConfig {
  std::variant<SyntheticSourceConfig, DirectorySourceConfig, ReplaySourceConfig> source = SyntheticSourceConfig{};
  BackendKind backend = BackendKind::inproc;
  Endpoint endpoint;
  RemoteOptions remote;
  std::optional<std::chrono::microseconds> replay_latency;  ///< in-process replay backend
  PipelineOptions pipeline;

  /// Throws ConfigError.
  void validate() const;
};

/// Builds source and backend from the config and runs. Startup failures
/// (unreachable backend, missing files) throw; mid-run failures return a
/// report flagged incomplete.
RunResult run(const RunConfig& config, FrameSink& sink);

}  // namespace cookar
