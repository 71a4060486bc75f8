#include "cookar/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "cookar/error.hpp"
#include "cookar/geometry.hpp"
#include "cookar/taxonomy.hpp"

namespace cookar {

namespace {

Polygon polygon_from_json(const nlohmann::json& seg, std::int64_t ann_id) {
  if (!seg.is_array() || seg.empty()) {
    throw ConfigError("annotation " + std::to_string(ann_id) + ": segmentation must be a non-empty list of rings");
  }
  Polygon shape;
  for (const auto& flat : seg) {
    if (!flat.is_array() || flat.size() % 2 != 0) {
      throw ConfigError("annotation " + std::to_string(ann_id) + ": ring must be a flat [x,y,...] array");
    }
    Ring ring;
    for (std::size_t i = 0; i < flat.size(); i += 2) {
      ring.push_back({flat[i].get<double>(), flat[i + 1].get<double>()});
    }
    shape.rings.push_back(std::move(ring));
  }
  return shape;
}

nlohmann::json polygon_to_json(const Polygon& shape) {
  auto seg = nlohmann::json::array();
  for (const Ring& ring : shape.rings) {
    auto flat = nlohmann::json::array();
    for (const Point& p : ring) {
      // Integral coordinates are written as integers.
      if (p.x == std::floor(p.x) && std::abs(p.x) < 1e15) flat.push_back(static_cast<long long>(p.x));
      else flat.push_back(p.x);
      if (p.y == std::floor(p.y) && std::abs(p.y) < 1e15) flat.push_back(static_cast<long long>(p.y));
      else flat.push_back(p.y);
    }
    seg.push_back(std::move(flat));
  }
  return seg;
}

}  // namespace

AnnotationSet AnnotationSet::with_kitchen_categories() {
  AnnotationSet set;
  for (const ClassEntry& e : ClassTaxonomy::kitchen().entries()) {
    set.categories.push_back({e.class_id, e.name, e.default_role});
  }
  return set;
}

void AnnotationSet::validate() const {
  std::set<std::int64_t> image_ids;
  for (const auto& img : images) {
    if (!image_ids.insert(img.id).second) throw ConfigError("duplicate image id " + std::to_string(img.id));
    if (img.width <= 0 || img.height <= 0) {
      throw ConfigError("image " + std::to_string(img.id) + " has non-positive dimensions");
    }
  }
  std::set<int> category_ids;
  for (const auto& c : categories) {
    if (!category_ids.insert(c.id).second) throw ConfigError("duplicate category id " + std::to_string(c.id));
  }
  std::set<std::int64_t> ann_ids;
  for (const auto& a : annotations) {
    const std::string tag = "annotation " + std::to_string(a.id);
    if (!ann_ids.insert(a.id).second) throw ConfigError("duplicate " + tag);
    if (!image_ids.contains(a.image_id)) throw ConfigError(tag + " references missing image " + std::to_string(a.image_id));
    if (!category_ids.contains(a.class_id)) {
      throw ConfigError(tag + " references missing category " + std::to_string(a.class_id));
    }
    if (a.shape.rings.empty()) throw ConfigError(tag + " has no rings");
    for (const Ring& ring : a.shape.rings) {
      if (ring.size() < 3) throw ConfigError(tag + " has a ring with fewer than 3 vertices");
      for (const Point& p : ring) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.y < 0) {
          throw ConfigError(tag + " has an invalid vertex coordinate");
        }
      }
    }
    if (a.score && !(*a.score >= 0.0 && *a.score <= 1.0)) throw ConfigError(tag + " score outside [0,1]");
  }
}

const ImageRecord* AnnotationSet::find_image(std::int64_t image_id) const noexcept {
  for (const auto& img : images) {
    if (img.id == image_id) return &img;
  }
  return nullptr;
}

const Category* AnnotationSet::find_category(int class_id) const noexcept {
  for (const auto& c : categories) {
    if (c.id == class_id) return &c;
  }
  return nullptr;
}

std::vector<const Annotation*> AnnotationSet::annotations_for(std::int64_t image_id) const {
  std::vector<const Annotation*> out;
  for (const auto& a : annotations) {
    if (a.image_id == image_id) out.push_back(&a);
  }
  std::sort(out.begin(), out.end(), [](const Annotation* l, const Annotation* r) { return l->id < r->id; });
  return out;
}

AnnotationSet annotations_from_json(const nlohmann::json& doc) {
  AnnotationSet set;
  try {
    for (const char* key : {"images", "annotations", "categories"}) {
      if (!doc.contains(key) || !doc.at(key).is_array()) {
        throw ConfigError(std::string("annotation file needs an array '") + key + "'");
      }
    }
    for (const auto& j : doc.at("images")) {
      set.images.push_back({j.at("id").get<std::int64_t>(), j.value("file_name", std::string{}),
                            j.at("width").get<int>(), j.at("height").get<int>()});
    }
    const ClassTaxonomy& taxonomy = ClassTaxonomy::kitchen();
    for (const auto& j : doc.at("categories")) {
      Category c;
      c.id = j.at("id").get<int>();
      c.name = j.value("name", std::string{});
      if (j.contains("role")) {
        const auto role = role_from_name(j.at("role").get<std::string>());
        if (!role) throw ConfigError("category " + std::to_string(c.id) + " has unknown role");
        c.role = *role;
      } else {
        c.role = taxonomy.contains(c.id) ? role_of(c.id, taxonomy) : Role::hazardous;
      }
      set.categories.push_back(std::move(c));
    }
    for (const auto& j : doc.at("annotations")) {
      Annotation a;
      a.id = j.at("id").get<std::int64_t>();
      a.image_id = j.at("image_id").get<std::int64_t>();
      a.class_id = j.at("category_id").get<int>();
      a.shape = polygon_from_json(j.at("segmentation"), a.id);
      if (j.contains("score") && !j.at("score").is_null()) a.score = j.at("score").get<double>();
      set.annotations.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed annotation file: ") + e.what());
  }
  set.validate();
  return set;
}

nlohmann::json annotations_to_json(const AnnotationSet& set) {
  nlohmann::json doc;
  doc["images"] = nlohmann::json::array();
  for (const auto& img : set.images) {
    doc["images"].push_back({{"id", img.id}, {"file_name", img.file_name}, {"width", img.width}, {"height", img.height}});
  }
  doc["annotations"] = nlohmann::json::array();
  for (const auto& a : set.annotations) {
    nlohmann::json j = {{"id", a.id},
                        {"image_id", a.image_id},
                        {"category_id", a.class_id},
                        {"segmentation", polygon_to_json(a.shape)},
                        {"area", polygon_area(a.shape)}};
    if (a.score) j["score"] = *a.score;
    doc["annotations"].push_back(std::move(j));
  }
  doc["categories"] = nlohmann::json::array();
  for (const auto& c : set.categories) {
    doc["categories"].push_back({{"id", c.id}, {"name", c.name}, {"role", std::string(role_name(c.role))}});
  }
  return doc;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  return annotations_from_json(read_json_file(path));
}

void save_annotations(const AnnotationSet& set, const std::filesystem::path& path) {
  write_json_file(annotations_to_json(set), path);
}

std::vector<AffordanceInstance> instances_for(const AnnotationSet& set, std::int64_t image_id) {
  std::vector<AffordanceInstance> out;
  for (const Annotation* a : set.annotations_for(image_id)) {
    const Category* cat = set.find_category(a->class_id);
    AffordanceInstance inst;
    inst.class_id = a->class_id;
    inst.role = cat ? cat->role : Role::hazardous;
    inst.confidence = a->score.value_or(1.0);
    inst.shape = a->shape;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace cookar
