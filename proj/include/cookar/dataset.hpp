#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "cookar/annotations.hpp"
#include "cookar/geometry.hpp"
#include "cookar/rng.hpp"

namespace cookar {

inline constexpr int kDefaultSkip = 20;

/// Scans ids in order; when the predicate fires at position i, emits that id
/// and resumes at position i + skip + 1.
std::vector<std::int64_t> filter_frames(std::span<const std::int64_t> ids,
                                        const std::function<bool(std::int64_t)>& predicate, int skip = kDefaultSkip);

/// Upper bounds of the sampled ranges; each value is drawn from [0, max] or
/// [-max, +max].
struct AugmentRanges {
  double max_zoom = 0.40;
  double max_rotation_deg = 15.0;
  double max_brightness = 0.15;
  double max_blur_sigma = 2.5;
  double max_noise_fraction = 0.001;

  static AugmentRanges none() { return {0, 0, 0, 0, 0}; }
  static AugmentRanges rotation_only(double deg = 15.0) { return {0, deg, 0, 0, 0}; }
  /// InvalidArgument when a bound is negative or zoom >= 1.
  void validate() const;
};

struct AugmentSample {
  double zoom = 0.0;    ///< crop window side = (1 - zoom) x image side
  double crop_u = 0.0;  ///< window position as a fraction of the free space
  double crop_v = 0.0;
  double rotation_deg = 0.0;
  double brightness = 0.0;
  double blur_sigma = 0.0;
  double noise_fraction = 0.0;
};

/// Draw order: zoom, crop_u, crop_v, rotation, brightness, blur, noise.
AugmentSample sample_augment(const AugmentRanges& ranges, SplitMix64& rng);

/// Crop-and-resize followed by rotation about the image centre.
Affine augment_transform(const AugmentSample& sample, int width, int height);

inline constexpr double kMinAnnotationArea = 4.0;

struct Augmented {
  RgbImage image;
  std::vector<Annotation> annotations;
  AugmentSample sample;
};

/// One augmented copy: sample from `rng`, then crop/resize, rotate (black
/// fill), brightness, blur, salt-and-pepper noise (positions also from
/// `rng`). Polygons follow the geometric transform; those whose area falls
/// below 4 px^2 are dropped.
Augmented augment(const RgbImage& image, std::span<const Annotation> annotations, const AugmentRanges& ranges,
                  SplitMix64& rng);
Augmented apply_augment(const RgbImage& image, std::span<const Annotation> annotations,
                        const AugmentSample& sample, SplitMix64& rng);

inline constexpr int kTargetWidth = 640;
inline constexpr int kTargetHeight = 480;

struct Resized {
  RgbImage image;
  std::vector<Annotation> annotations;
};

/// Stretch to width x height; vertices scaled by (width / w, height / h).
Resized normalize_resolution(const RgbImage& image, std::span<const Annotation> annotations,
                             int width = kTargetWidth, int height = kTargetHeight);

struct SplitSpec {
  std::array<double, 3> ratios = {0.82, 0.12, 0.06};
  std::uint64_t seed = 0;
  void validate() const;
};

struct SplitResult {
  std::vector<std::int64_t> train;
  std::vector<std::int64_t> val;
  std::vector<std::int64_t> test;
};

/// Partition sizes by largest remainder over the ratios (ties to the earlier
/// partition).
std::array<std::size_t, 3> split_sizes(std::size_t count, const std::array<double, 3>& ratios);

/// Sorts the ids, shuffles them with SplitMix64(seed) (Fisher-Yates), then
/// cuts by split_sizes. InvalidArgument on duplicates or fewer than 3 ids.
SplitResult split(std::span<const std::int64_t> ids, const SplitSpec& spec);

/// {"train": [...], "val": [...], "test": [...], "seed": n}
nlohmann::json split_manifest(const SplitResult& result, std::uint64_t seed);

// File-level operations on an annotation set with its image directory.

/// Ids of images kept by filter_frames with "has at least one annotation"
/// as the predicate, scanning images in id order.
std::vector<std::int64_t> filter_annotated(const AnnotationSet& set, int skip = kDefaultSkip);

/// One augmented copy per image, seeded per image with SplitMix64(seed ^ id).
/// Images go to out_dir as <stem>_aug<seed>.png; image and annotation ids are
/// shifted by id_offset. Returns the new set.
AnnotationSet augment_dataset(const AnnotationSet& set, const std::filesystem::path& image_dir,
                              const std::filesystem::path& out_dir, const AugmentRanges& ranges, std::uint64_t seed,
                              std::int64_t id_offset = 0);

/// Stretches every image to width x height into out_dir (same file names).
AnnotationSet resize_dataset(const AnnotationSet& set, const std::filesystem::path& image_dir,
                             const std::filesystem::path& out_dir, int width = kTargetWidth,
                             int height = kTargetHeight);

}  // namespace cookar
