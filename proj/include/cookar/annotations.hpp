#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cookar/types.hpp"

namespace cookar {

struct ImageRecord {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  int class_id = 0;
  Polygon shape;
  std::optional<double> score;
};

struct Category {
  int id = 0;
  std::string name;
  Role role = Role::hazardous;
};

/// COCO-style annotation file: top-level `images`, `annotations` and
/// `categories`. Each annotation carries `id`, `image_id`, `category_id`,
/// `segmentation` (list of flat [x1,y1,x2,y2,...] rings, exterior first) and
/// an optional `score`. Categories may carry a `role`; missing roles fall back
/// to the taxonomy default. Other keys are ignored.
struct AnnotationSet {
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
  std::vector<Category> categories;

  /// Empty set with the 18 kitchen categories and their default roles.
  static AnnotationSet with_kitchen_categories();

  /// Throws ConfigError on missing references or malformed rings.
  void validate() const;

  const ImageRecord* find_image(std::int64_t image_id) const noexcept;
  const Category* find_category(int class_id) const noexcept;
  /// Annotations of one image, ascending annotation id.
  std::vector<const Annotation*> annotations_for(std::int64_t image_id) const;
};

AnnotationSet annotations_from_json(const nlohmann::json& doc);
nlohmann::json annotations_to_json(const AnnotationSet& set);

AnnotationSet load_annotations(const std::filesystem::path& path);
void save_annotations(const AnnotationSet& set, const std::filesystem::path& path);

/// Instances of one image in annotation-id order; scores default to 1.0.
std::vector<AffordanceInstance> instances_for(const AnnotationSet& set, std::int64_t image_id);

/// Reads/writes a JSON document; ConfigError on I/O or parse failure.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace cookar
