#include "cookar/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cookar/error.hpp"

namespace cookar {

namespace {

StageStats stats_of(const std::vector<double>& ms) {
  if (ms.empty()) return {};
  const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
  return {mean, percentile(ms, 50.0), percentile(ms, 95.0)};
}

}  // namespace

std::string_view stage_name(Stage stage) noexcept {
  switch (stage) {
    case Stage::capture: return "capture";
    case Stage::stream_to_server: return "stream_to_server";
    case Stage::inference: return "inference";
    case Stage::stream_back: return "stream_back";
    case Stage::render: return "render";
  }
  return "unknown";
}

std::string_view mode_name(RunMode mode) noexcept { return mode == RunMode::serial ? "serial" : "pipelined"; }

double LatencyReport::residual_ms() const noexcept {
  double sum = 0.0;
  for (const auto& s : stages) sum += s.mean_ms;
  return end_to_end.mean_ms - sum;
}

double percentile(std::vector<double> samples, double p) {
  if (samples.empty()) throw InvalidArgument("percentile of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double rank = std::ceil(p / 100.0 * static_cast<double>(samples.size()));
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(samples.size()))) - 1;
  return samples[idx];
}

void LatencyProfiler::record_stage(std::uint64_t frame_id, Stage stage, std::int64_t duration_us) {
  std::lock_guard lock(mutex_);
  StageTiming& t = timings_[frame_id];
  t.frame_id = frame_id;
  auto& slot = t.stage_us[static_cast<std::size_t>(stage)];
  if (slot) {
    throw InvalidArgument("duplicate timing for frame " + std::to_string(frame_id) + " stage " +
                          std::string(stage_name(stage)));
  }
  slot = std::max<std::int64_t>(duration_us, 0);
}

void LatencyProfiler::record_frame(std::uint64_t frame_id, std::int64_t start_us, std::int64_t end_us) {
  std::lock_guard lock(mutex_);
  StageTiming& t = timings_[frame_id];
  t.frame_id = frame_id;
  if (t.start_us) throw InvalidArgument("duplicate end-to-end timing for frame " + std::to_string(frame_id));
  t.start_us = start_us;
  t.end_us = std::max(end_us, start_us);
}

std::vector<StageTiming> LatencyProfiler::timings() const {
  std::lock_guard lock(mutex_);
  std::vector<StageTiming> out;
  out.reserve(timings_.size());
  for (const auto& [id, t] : timings_) out.push_back(t);
  return out;
}

LatencyReport latency_report(const std::vector<StageTiming>& timings, RunMode mode, std::size_t drops) {
  LatencyReport r;
  r.mode = mode;
  r.drops = drops;
  std::array<std::vector<double>, kStageCount> per_stage;
  std::vector<double> e2e;
  std::int64_t first = 0;
  std::int64_t last = 0;
  bool spans_known = true;
  for (const StageTiming& t : timings) {
    std::int64_t stage_sum = 0;
    bool any = false;
    for (std::size_t s = 0; s < kStageCount; ++s) {
      per_stage[s].push_back(static_cast<double>(t.stage_us[s].value_or(0)) / 1000.0);
      stage_sum += t.stage_us[s].value_or(0);
      any = any || t.stage_us[s].has_value();
    }
    if (!any && !t.start_us) {
      for (auto& v : per_stage) v.pop_back();
      continue;
    }
    if (t.start_us && t.end_us) {
      e2e.push_back(static_cast<double>(t.end_to_end_us()) / 1000.0);
      if (r.frames == 0 || *t.start_us < first) first = *t.start_us;
      if (r.frames == 0 || *t.end_us > last) last = *t.end_us;
    } else {
      // No presentation record: the stages are all that is known.
      e2e.push_back(static_cast<double>(stage_sum) / 1000.0);
      spans_known = false;
    }
    ++r.frames;
  }
  for (std::size_t s = 0; s < kStageCount; ++s) r.stages[s] = stats_of(per_stage[s]);
  r.end_to_end = stats_of(e2e);
  if (r.frames > 0) {
    if (spans_known) {
      const double span_s = static_cast<double>(std::max<std::int64_t>(last - first, 1)) / 1e6;
      r.fps = static_cast<double>(r.frames) / span_s;
    } else {
      r.fps = 1000.0 / std::max(r.end_to_end.mean_ms, 1e-3);
    }
  }
  return r;
}

nlohmann::json report_to_json(const LatencyReport& report) {
  nlohmann::json stages = nlohmann::json::object();
  for (Stage s : kStages) {
    const StageStats& st = report[s];
    stages[std::string(stage_name(s))] = {{"mean_ms", st.mean_ms}, {"p50_ms", st.p50_ms}, {"p95_ms", st.p95_ms}};
  }
  return {{"stages", stages},
          {"end_to_end_ms", report.end_to_end.mean_ms},
          {"end_to_end", {{"mean_ms", report.end_to_end.mean_ms},
                          {"p50_ms", report.end_to_end.p50_ms},
                          {"p95_ms", report.end_to_end.p95_ms}}},
          {"residual_ms", report.residual_ms()},
          {"fps", report.fps},
          {"frames", report.frames},
          {"drops", report.drops},
          {"mode", std::string(mode_name(report.mode))},
          {"complete", report.complete}};
}

std::string render_report(const LatencyReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-18s %10s %10s %10s\n", "stage", "mean ms", "p50 ms", "p95 ms");
  out += line;
  for (Stage s : kStages) {
    const StageStats& st = report[s];
    std::snprintf(line, sizeof(line), "%-18s %10.2f %10.2f %10.2f\n", std::string(stage_name(s)).c_str(), st.mean_ms,
                  st.p50_ms, st.p95_ms);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-18s %10.2f %10.2f %10.2f\n", "end_to_end", report.end_to_end.mean_ms,
                report.end_to_end.p50_ms, report.end_to_end.p95_ms);
  out += line;
  std::snprintf(line, sizeof(line), "%-18s %10.2f\n", "unattributed", report.residual_ms());
  out += line;
  std::snprintf(line, sizeof(line), "frames %zu, drops %zu, %.2f fps (%s)%s\n", report.frames, report.drops, report.fps,
                std::string(mode_name(report.mode)).c_str(), report.complete ? "" : " INCOMPLETE");
  out += line;
  return out;
}

}  // namespace cookar
