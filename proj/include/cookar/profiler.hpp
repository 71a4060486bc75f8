#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cookar {

/// Pipeline stages in report order.
enum class Stage : std::uint8_t { capture = 0, stream_to_server = 1, inference = 2, stream_back = 3, render = 4 };
inline constexpr std::size_t kStageCount = 5;
inline constexpr std::array<Stage, kStageCount> kStages = {Stage::capture, Stage::stream_to_server, Stage::inference,
                                                           Stage::stream_back, Stage::render};
std::string_view stage_name(Stage stage) noexcept;

enum class RunMode { serial, pipelined };
std::string_view mode_name(RunMode mode) noexcept;

struct StageTiming {
  std::uint64_t frame_id = 0;
  std::array<std::optional<std::int64_t>, kStageCount> stage_us{};
  /// Start of capture and end of presentation, microseconds since run start.
  std::optional<std::int64_t> start_us;
  std::optional<std::int64_t> end_us;

  std::int64_t stage_or_zero(Stage s) const noexcept { return stage_us[static_cast<std::size_t>(s)].value_or(0); }
  std::int64_t end_to_end_us() const noexcept { return start_us && end_us ? *end_us - *start_us : 0; }
};

struct StageStats {
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
};

struct LatencyReport {
  std::array<StageStats, kStageCount> stages{};
  StageStats end_to_end;
  double fps = 0.0;
  std::size_t frames = 0;
  std::size_t drops = 0;
  RunMode mode = RunMode::serial;
  bool complete = true;

  /// Mean end-to-end time not attributed to any of the five stages.
  double residual_ms() const noexcept;
  const StageStats& operator[](Stage s) const noexcept { return stages[static_cast<std::size_t>(s)]; }
};

/// Nearest-rank percentile: the smallest sample with at least p% of the
/// samples <= it. Requires a non-empty input.
double percentile(std::vector<double> samples, double p);

/// Thread-safe sink for timing records from all pipeline workers.
class LatencyProfiler {
 public:
  /// Throws InvalidArgument on a second duration for the same (frame, stage).
  void record_stage(std::uint64_t frame_id, Stage stage, std::int64_t duration_us);
  void record_frame(std::uint64_t frame_id, std::int64_t start_us, std::int64_t end_us);
  std::vector<StageTiming> timings() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::uint64_t, StageTiming> timings_;
};

/// Exact statistics over the recorded samples. A frame without an end-to-end
/// record counts the sum of its stages as end-to-end. fps is frames over the
/// span from the first capture start to the last presentation end (1000 /
/// mean end-to-end when spans are missing).
LatencyReport latency_report(const std::vector<StageTiming>& timings, RunMode mode = RunMode::serial,
                             std::size_t drops = 0);

/// Keys: stages (name -> {mean_ms, p50_ms, p95_ms}), end_to_end_ms, fps,
/// frames, drops, mode, plus residual_ms and complete.
nlohmann::json report_to_json(const LatencyReport& report);

/// Human-readable table: the five stages, then end-to-end and the residual.
std::string render_report(const LatencyReport& report);

}  // namespace cookar
