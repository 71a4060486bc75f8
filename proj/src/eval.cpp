#include "cookar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "cookar/error.hpp"
#include "cookar/geometry.hpp"
#include "cookar/taxonomy.hpp"

namespace cookar {

namespace {

/// IoU >= threshold without floating division. Thresholds that are whole
/// percentages compare exactly.
bool reaches(const Overlap& o, double threshold) {
  if (o.union_ == 0) return false;
  const double pct = threshold * 100.0;
  const double whole = std::round(pct);
  if (std::abs(pct - whole) < 1e-9) {
    return static_cast<std::uint64_t>(o.intersection) * 100 >=
           static_cast<std::uint64_t>(whole) * static_cast<std::uint64_t>(o.union_);
  }
  return static_cast<double>(o.intersection) >= threshold * static_cast<double>(o.union_);
}

bool ranks_before(double score_a, std::int64_t id_a, double score_b, std::int64_t id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

std::vector<std::size_t> ranked_predictions(std::span<const Detection> predictions, std::size_t max_dets) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(predictions[a].score, predictions[a].id, predictions[b].score, predictions[b].id);
  });
  if (order.size() > max_dets) order.resize(max_dets);
  return order;
}

// Greedy matching with precomputed overlaps: overlaps[p][g].
MatchResult match_with(std::span<const Detection> predictions, std::span<const Detection> gts,
                       const std::vector<std::size_t>& order, const std::vector<std::vector<Overlap>>& overlaps,
                       double threshold) {
  MatchResult out;
  for (const auto& g : gts) ++out.gt_count[g.class_id];
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t p : order) {
    const Detection& pred = predictions[p];
    MatchEntry entry{pred.id, pred.class_id, pred.score, std::nullopt};
    std::optional<std::size_t> best;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].class_id != pred.class_id) continue;
      const Overlap& o = overlaps[p][g];
      if (!reaches(o, threshold)) continue;
      if (!best) {
        best = g;
        continue;
      }
      // Compare IoUs as fractions: i1/u1 vs i2/u2.
      const Overlap& b = overlaps[p][*best];
      const auto lhs = static_cast<unsigned __int128>(o.intersection) * b.union_;
      const auto rhs = static_cast<unsigned __int128>(b.intersection) * o.union_;
      if (lhs > rhs || (lhs == rhs && gts[g].id < gts[*best].id)) best = g;
    }
    if (best) {
      taken[*best] = true;
      entry.gt_id = gts[*best].id;
    }
    out.entries.push_back(entry);
  }
  return out;
}

std::vector<std::vector<Overlap>> overlap_matrix(std::span<const Detection> predictions,
                                                 std::span<const Detection> gts,
                                                 const std::vector<std::size_t>& order) {
  std::vector<std::vector<Overlap>> overlaps(predictions.size(), std::vector<Overlap>(gts.size()));
  for (std::size_t p : order)
    for (std::size_t g = 0; g < gts.size(); ++g)
      if (predictions[p].class_id == gts[g].class_id) overlaps[p][g] = mask_overlap(predictions[p].mask, gts[g].mask);
  return overlaps;
}

void check_sizes(std::span<const Detection> predictions, std::span<const Detection> gts) {
  const Bitmask* ref = nullptr;
  for (const auto* group : {&predictions, &gts})
    for (const auto& d : *group) {
      if (!ref) ref = &d.mask;
      if (!d.mask.same_size(*ref)) throw InvalidArgument("masks of one image differ in size");
    }
}

}  // namespace

MatchResult match_instances(std::span<const Detection> predictions, std::span<const Detection> ground_truths,
                            double iou_threshold, std::size_t max_dets) {
  check_sizes(predictions, ground_truths);
  const auto order = ranked_predictions(predictions, max_dets);
  const auto overlaps = overlap_matrix(predictions, ground_truths, order);
  return match_with(predictions, ground_truths, order, overlaps, iou_threshold);
}

double average_precision(std::vector<MatchEntry> entries, std::size_t gt_count) {
  if (gt_count == 0) throw InvalidArgument("average precision needs at least one ground truth");
  std::sort(entries.begin(), entries.end(), [](const MatchEntry& a, const MatchEntry& b) {
    return ranks_before(a.score, a.pred_id, b.score, b.pred_id);
  });
  const std::size_t n = entries.size();
  std::vector<std::size_t> tp(n);
  std::vector<double> precision(n);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (entries[i].gt_id) ++hits;
    tp[i] = hits;
    precision[i] = static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  std::size_t i = 0;
  for (int k = 0; k < kRecallLevels; ++k) {
    // First rank whose recall tp/gt_count reaches k/100.
    while (i < n && tp[i] * 100 < static_cast<std::size_t>(k) * gt_count) ++i;
    if (i == n) break;
    sum += precision[i];
  }
  return sum / kRecallLevels;
}

double ClassResult::mean() const noexcept {
  return std::accumulate(ap.begin(), ap.end(), 0.0) / static_cast<double>(ap.size());
}

MetricsReport evaluate(const AnnotationSet& predictions, const AnnotationSet& ground_truth, std::size_t max_dets) {
  if (ground_truth.annotations.empty()) throw InvalidArgument("ground truth has no annotations");
  for (const auto& p : predictions.annotations) {
    if (!p.score) throw InvalidArgument("prediction " + std::to_string(p.id) + " has no score");
    if (!ground_truth.find_image(p.image_id))
      throw InvalidArgument("prediction " + std::to_string(p.id) + " refers to unknown image " +
                            std::to_string(p.image_id));
  }

  constexpr std::size_t kT = kIouThresholdsPct.size();
  // Pooled matches per (class, threshold index).
  std::map<int, std::array<std::vector<MatchEntry>, kT>> pooled;
  std::map<int, std::size_t> gt_count;
  std::map<int, std::size_t> pred_count;

  std::vector<ImageRecord> images = ground_truth.images;
  std::sort(images.begin(), images.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& image : images) {
    auto detections = [&](const AnnotationSet& set) {
      std::vector<Detection> out;
      for (const Annotation* a : set.annotations_for(image.id))
        out.push_back({a->id, a->class_id, a->score.value_or(1.0), rasterize(a->shape, image.width, image.height)});
      return out;
    };
    const auto gts = detections(ground_truth);
    const auto preds = detections(predictions);
    for (const auto& g : gts) ++gt_count[g.class_id];
    for (const auto& p : preds) ++pred_count[p.class_id];

    const auto order = ranked_predictions(preds, max_dets);
    const auto overlaps = overlap_matrix(preds, gts, order);
    for (std::size_t t = 0; t < kT; ++t) {
      auto m = match_with(preds, gts, order, overlaps, kIouThresholdsPct[t] / 100.0);
      for (auto& e : m.entries) pooled[e.class_id][t].push_back(e);
    }
  }

  MetricsReport report;
  report.max_dets = max_dets;
  report.predictions = predictions.annotations.size();
  report.ground_truths = ground_truth.annotations.size();
  const auto& kitchen = ClassTaxonomy::kitchen();
  double sum_all = 0.0, sum50 = 0.0, sum75 = 0.0;
  for (const auto& [class_id, count] : gt_count) {
    ClassResult c;
    c.class_id = class_id;
    if (const Category* cat = ground_truth.find_category(class_id))
      c.name = cat->name;
    else if (kitchen.contains(class_id))
      c.name = kitchen.at(class_id).name;
    else
      c.name = std::to_string(class_id);
    c.gt_count = count;
    c.pred_count = pred_count[class_id];
    for (std::size_t t = 0; t < kT; ++t) {
      c.ap[t] = average_precision(pooled[class_id][t], count);
      sum_all += c.ap[t];
    }
    sum50 += c.ap[0];
    sum75 += c.ap[5];
    report.classes.push_back(std::move(c));
  }
  const auto n = static_cast<double>(report.classes.size());
  report.map = sum_all / (n * static_cast<double>(kT));
  report.ap50 = sum50 / n;
  report.ap75 = sum75 / n;
  return report;
}

nlohmann::json report_to_json(const MetricsReport& report, const std::string& model) {
  nlohmann::json thresholds = nlohmann::json::array();
  for (int pct : kIouThresholdsPct) thresholds.push_back(pct / 100.0);
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : report.classes) {
    classes.push_back({{"class_id", c.class_id},
                       {"name", c.name},
                       {"gt_count", c.gt_count},
                       {"pred_count", c.pred_count},
                       {"ap", c.ap},
                       {"mAP", c.mean()}});
  }
  return {{"model", model},
          {"mAP", report.map},
          {"AP@50", report.ap50},
          {"AP@75", report.ap75},
          {"thresholds", thresholds},
          {"per_class", classes},
          {"predictions", report.predictions},
          {"ground_truths", report.ground_truths},
          {"settings",
           {{"interpolation", "101-point"},
            {"max_dets", report.max_dets},
            {"matching", "greedy within class"},
            {"classes_without_ground_truth", "excluded"},
            {"note", "interpolation and max_dets follow COCO defaults (assumed)"}}}};
}

std::vector<TableRow> table_rows_from_json(const nlohmann::json& doc) {
  auto row = [](const nlohmann::json& r) {
    for (const char* key : {"mAP", "AP@50", "AP@75"})
      if (!r.contains(key) || !r.at(key).is_number()) throw ConfigError(std::string("report row lacks ") + key);
    return TableRow{r.value("model", std::string("model")), r.at("mAP").get<double>(), r.at("AP@50").get<double>(),
                    r.at("AP@75").get<double>()};
  };
  std::vector<TableRow> rows;
  if (doc.is_object() && doc.contains("rows")) {
    if (!doc.at("rows").is_array()) throw ConfigError("\"rows\" must be an array");
    for (const auto& r : doc.at("rows")) rows.push_back(row(r));
  } else if (doc.is_object()) {
    rows.push_back(row(doc));
  } else {
    throw ConfigError("report must be a JSON object");
  }
  return rows;
}

std::string render_table(std::span<const TableRow> rows) {
  std::size_t width = 5;  // "Model"
  for (const auto& r : rows) width = std::max(width, r.model.size());
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  std::string out = pad("Model") + " | mAP   | AP@50 | AP@75\n";
  for (const auto& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " | %.3f | %.3f | %.3f\n", r.map, r.ap50, r.ap75);
    out += pad(r.model) + buf;
  }
  return out;
}

}  // namespace cookar
