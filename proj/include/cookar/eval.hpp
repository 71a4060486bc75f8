#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cookar/annotations.hpp"

namespace cookar {

/// IoU thresholds 0.50, 0.55, ..., 0.95 in percent. Comparisons against them
/// are done in integers: intersection * 100 >= pct * union.
inline constexpr std::array<int, 10> kIouThresholdsPct = {50, 55, 60, 65, 70, 75, 80, 85, 90, 95};
inline constexpr std::size_t kDefaultMaxDets = 100;
inline constexpr int kRecallLevels = 101;

/// A rasterized instance of one image. For ground truth the score is unused.
struct Detection {
  std::int64_t id = 0;
  int class_id = 0;
  double score = 1.0;
  Bitmask mask;
};

struct MatchEntry {
  std::int64_t pred_id = 0;
  int class_id = 0;
  double score = 0.0;
  std::optional<std::int64_t> gt_id;  ///< set for a true positive
};

struct MatchResult {
  std::vector<MatchEntry> entries;  ///< processing order
  std::map<int, std::size_t> gt_count;
};

/// Greedy within-class matching on one image at one IoU threshold (a fraction,
/// e.g. 0.5). Predictions go in descending score, ties to the lower id; only
/// the first max_dets are kept. Each takes the unmatched same-class ground
/// truth with the highest IoU (ties to the lower id) if it reaches the
/// threshold. InvalidArgument when mask sizes differ.
MatchResult match_instances(std::span<const Detection> predictions, std::span<const Detection> ground_truths,
                            double iou_threshold, std::size_t max_dets = kDefaultMaxDets);

/// 101-point interpolated AP over matches of one class pooled across images.
/// Entries are ranked by descending score, ties to the lower prediction id.
/// Requires gt_count >= 1.
double average_precision(std::vector<MatchEntry> entries, std::size_t gt_count);

struct ClassResult {
  int class_id = 0;
  std::string name;
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
  std::array<double, kIouThresholdsPct.size()> ap{};
  double mean() const noexcept;
};

struct MetricsReport {
  double map = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  std::vector<ClassResult> classes;  ///< classes with at least one ground truth
  std::size_t predictions = 0;
  std::size_t ground_truths = 0;
  std::size_t max_dets = kDefaultMaxDets;
};

/// Scores predictions against ground truth. InvalidArgument when a prediction
/// lacks a score, the ground truth has no annotations, or a prediction refers
/// to an image the ground truth does not list.
MetricsReport evaluate(const AnnotationSet& predictions, const AnnotationSet& ground_truth,
                       std::size_t max_dets = kDefaultMaxDets);

nlohmann::json report_to_json(const MetricsReport& report, const std::string& model = "model");

struct TableRow {
  std::string model;
  double map = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
};

/// Reads either one report object (keys model, mAP, AP@50, AP@75) or
/// {"rows": [report, ...]}. ConfigError on missing keys.
std::vector<TableRow> table_rows_from_json(const nlohmann::json& doc);

/// `Model | mAP | AP@50 | AP@75` header then one `name | %.3f | %.3f | %.3f`
/// line per row, the name column padded to the longest name.
std::string render_table(std::span<const TableRow> rows);

}  // namespace cookar
