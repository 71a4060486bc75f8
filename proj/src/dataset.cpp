#include "cookar/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cookar/error.hpp"
#include "cookar/image_io.hpp"
#include "cookar/image_ops.hpp"
#include "cookar/log.hpp"

namespace cookar {

namespace fs = std::filesystem;

std::vector<std::int64_t> filter_frames(std::span<const std::int64_t> ids,
                                        const std::function<bool(std::int64_t)>& predicate, int skip) {
  if (skip < 0) throw InvalidArgument("skip must be non-negative");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < ids.size();) {
    if (predicate(ids[i])) {
      out.push_back(ids[i]);
      i += static_cast<std::size_t>(skip) + 1;
    } else {
      ++i;
    }
  }
  return out;
}

void AugmentRanges::validate() const {
  for (double v : {max_zoom, max_rotation_deg, max_brightness, max_blur_sigma, max_noise_fraction})
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("augmentation bounds must be finite and >= 0");
  if (max_zoom >= 1.0) throw InvalidArgument("zoom must be below 1");
  if (max_brightness > 1.0) throw InvalidArgument("brightness bound must be at most 1");
  if (max_noise_fraction > 1.0) throw InvalidArgument("noise fraction must be at most 1");
}

AugmentSample sample_augment(const AugmentRanges& ranges, SplitMix64& rng) {
  ranges.validate();
  AugmentSample s;
  s.zoom = rng.uniform(0.0, ranges.max_zoom);
  s.crop_u = rng.uniform();
  s.crop_v = rng.uniform();
  s.rotation_deg = rng.uniform(-ranges.max_rotation_deg, ranges.max_rotation_deg);
  s.brightness = rng.uniform(-ranges.max_brightness, ranges.max_brightness);
  s.blur_sigma = rng.uniform(0.0, ranges.max_blur_sigma);
  s.noise_fraction = rng.uniform(0.0, ranges.max_noise_fraction);
  return s;
}

Affine augment_transform(const AugmentSample& sample, int width, int height) {
  const double keep = 1.0 - sample.zoom;
  const double ww = keep * width, wh = keep * height;
  const double x0 = sample.crop_u * (width - ww), y0 = sample.crop_v * (height - wh);
  const Affine crop = Affine::scale(width / ww, height / wh).after(Affine::translation(-x0, -y0));
  if (sample.rotation_deg == 0.0) return crop;
  return Affine::rotation_about(sample.rotation_deg, width / 2.0, height / 2.0).after(crop);
}

Augmented apply_augment(const RgbImage& image, std::span<const Annotation> annotations,
                        const AugmentSample& sample, SplitMix64& rng) {
  const int w = image.width(), h = image.height();
  const Affine t = augment_transform(sample, w, h);
  const bool identity = t == Affine::identity();

  Augmented out;
  out.sample = sample;
  out.image = identity ? image : warp_affine(image, t, w, h);
  if (sample.brightness != 0.0) out.image = adjust_brightness(out.image, sample.brightness);
  out.image = gaussian_blur(out.image, sample.blur_sigma);
  salt_and_pepper(out.image, sample.noise_fraction, rng);

  for (const auto& a : annotations) {
    if (identity) {
      out.annotations.push_back(a);
      continue;
    }
    auto moved = transform_polygon(a.shape, t, w, h);
    if (!moved || polygon_area(*moved) < kMinAnnotationArea) continue;
    Annotation copy = a;
    copy.shape = std::move(*moved);
    out.annotations.push_back(std::move(copy));
  }
  if (!annotations.empty() && out.annotations.empty()) log().warn("augmentation dropped every annotation");
  return out;
}

Augmented augment(const RgbImage& image, std::span<const Annotation> annotations, const AugmentRanges& ranges,
                  SplitMix64& rng) {
  const AugmentSample sample = sample_augment(ranges, rng);
  return apply_augment(image, annotations, sample, rng);
}

Resized normalize_resolution(const RgbImage& image, std::span<const Annotation> annotations, int width,
                             int height) {
  if (image.empty() || width <= 0 || height <= 0) throw InvalidArgument("resize needs positive dimensions");
  const double sx = static_cast<double>(width) / image.width();
  const double sy = static_cast<double>(height) / image.height();
  Resized out;
  out.image = image.width() == width && image.height() == height ? image : resize_bilinear(image, width, height);
  for (const auto& a : annotations) {
    Annotation copy = a;
    for (auto& ring : copy.shape.rings)
      for (auto& p : ring) p = {p.x * sx, p.y * sy};
    out.annotations.push_back(std::move(copy));
  }
  return out;
}

void SplitSpec::validate() const {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw InvalidArgument("split ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("split ratios must sum to 1");
}

std::array<std::size_t, 3> split_sizes(std::size_t count, const std::array<double, 3>& ratios) {
  // Integer weights keep the arithmetic exact.
  std::array<std::uint64_t, 3> weight{};
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < 3; ++i) total += weight[i] = static_cast<std::uint64_t>(std::llround(ratios[i] * 1e6));
  if (total == 0) throw InvalidArgument("split ratios are all zero");
  std::array<std::size_t, 3> size{};
  std::array<std::uint64_t, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto share = static_cast<unsigned __int128>(count) * weight[i];
    size[i] = static_cast<std::size_t>(share / total);
    rem[i] = static_cast<std::uint64_t>(share % total);
    assigned += size[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < count; ++k, ++assigned) ++size[order[k % 3]];
  return size;
}

SplitResult split(std::span<const std::int64_t> ids, const SplitSpec& spec) {
  spec.validate();
  if (ids.size() < 3) throw InvalidArgument("split needs at least 3 ids");
  std::vector<std::int64_t> order(ids.begin(), ids.end());
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) throw InvalidArgument("split ids must be unique");
  SplitMix64 rng(spec.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  const auto sizes = split_sizes(order.size(), spec.ratios);
  SplitResult out;
  auto first = order.begin();
  out.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes[0]));
  first += static_cast<std::ptrdiff_t>(sizes[0]);
  out.val.assign(first, first + static_cast<std::ptrdiff_t>(sizes[1]));
  first += static_cast<std::ptrdiff_t>(sizes[1]);
  out.test.assign(first, order.end());
  return out;
}

nlohmann::json split_manifest(const SplitResult& result, std::uint64_t seed) {
  return {{"train", result.train}, {"val", result.val}, {"test", result.test}, {"seed", seed}};
}

std::vector<std::int64_t> filter_annotated(const AnnotationSet& set, int skip) {
  std::vector<std::int64_t> ids;
  for (const auto& image : set.images) ids.push_back(image.id);
  std::sort(ids.begin(), ids.end());
  std::set<std::int64_t> annotated;
  for (const auto& a : set.annotations) annotated.insert(a.image_id);
  return filter_frames(ids, [&](std::int64_t id) { return annotated.count(id) > 0; }, skip);
}

namespace {

std::vector<Annotation> copies_for(const AnnotationSet& set, std::int64_t image_id) {
  std::vector<Annotation> out;
  for (const Annotation* a : set.annotations_for(image_id)) out.push_back(*a);
  return out;
}

AnnotationSet empty_like(const AnnotationSet& set) {
  AnnotationSet out;
  out.categories = set.categories;
  return out;
}

std::vector<ImageRecord> images_by_id(const AnnotationSet& set) {
  auto images = set.images;
  std::sort(images.begin(), images.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return images;
}

}  // namespace

AnnotationSet augment_dataset(const AnnotationSet& set, const fs::path& image_dir, const fs::path& out_dir,
                              const AugmentRanges& ranges, std::uint64_t seed, std::int64_t id_offset) {
  ranges.validate();
  fs::create_directories(out_dir);
  AnnotationSet out = empty_like(set);
  for (const auto& image : images_by_id(set)) {
    const RgbImage pixels = read_png(image_dir / image.file_name);
    SplitMix64 rng(seed ^ static_cast<std::uint64_t>(image.id));
    const auto annotations = copies_for(set, image.id);
    Augmented result = augment(pixels, annotations, ranges, rng);

    ImageRecord record = image;
    record.id = image.id + id_offset;
    record.file_name = fs::path(image.file_name).stem().string() + "_aug" + std::to_string(seed) + ".png";
    record.width = result.image.width();
    record.height = result.image.height();
    write_png(result.image, out_dir / record.file_name);
    out.images.push_back(record);
    for (auto& a : result.annotations) {
      a.id += id_offset;
      a.image_id = record.id;
      out.annotations.push_back(std::move(a));
    }
  }
  return out;
}

AnnotationSet resize_dataset(const AnnotationSet& set, const fs::path& image_dir, const fs::path& out_dir, int width,
                             int height) {
  fs::create_directories(out_dir);
  AnnotationSet out = empty_like(set);
  for (const auto& image : images_by_id(set)) {
    const RgbImage pixels = read_png(image_dir / image.file_name);
    const auto annotations = copies_for(set, image.id);
    Resized result = normalize_resolution(pixels, annotations, width, height);
    ImageRecord record = image;
    record.width = width;
    record.height = height;
    const fs::path target = out_dir / record.file_name;
    fs::create_directories(target.parent_path());
    write_png(result.image, target);
    out.images.push_back(record);
    for (auto& a : result.annotations) out.annotations.push_back(std::move(a));
  }
  return out;
}

}  // namespace cookar
