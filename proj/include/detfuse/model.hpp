#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "detfuse/geometry.hpp"

namespace detfuse {

namespace detail {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

using StringIndex =
    std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>>;

}  // namespace detail

// Ordered class label space. Labels are unique, non-empty, case-sensitive;
// the dense index of a label is its position in the list.
class ClassRegistry {
 public:
  explicit ClassRegistry(std::vector<std::string> names);

  // The eight endoscopy artifact classes, in their conventional order.
  static ClassRegistry ead();

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t id) const;
  std::optional<std::size_t> find(std::string_view label) const;
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool operator==(const ClassRegistry& other) const {
    return names_ == other.names_;
  }

 private:
  std::vector<std::string> names_;
  detail::StringIndex index_;
};

struct Detection {
  std::string image_id;
  std::size_t class_id;
  BoundingBox box;
  double score;  // confidence in [0, 1]
  std::string model_id;

  bool operator==(const Detection&) const = default;
};

struct GroundTruthAnnotation {
  std::string image_id;
  std::size_t class_id;
  BoundingBox box;

  bool operator==(const GroundTruthAnnotation&) const = default;
};

struct ImageInfo {
  std::string id;
  double width;
  double height;

  bool operator==(const ImageInfo&) const = default;
};

// One model's predictions. Every record carries the file-level model_id.
struct DetectionFile {
  std::string model_id;
  std::vector<Detection> detections;

  bool operator==(const DetectionFile&) const = default;
};

// Images plus ground-truth annotations, immutable after construction.
// Construction validates unique image ids, positive dimensions, known class
// ids, and that every annotation box lies inside its image.
class DatasetManifest {
 public:
  DatasetManifest(std::vector<ImageInfo> images,
                  std::vector<GroundTruthAnnotation> annotations,
                  ClassRegistry registry);

  const std::vector<ImageInfo>& images() const noexcept { return images_; }
  const std::vector<GroundTruthAnnotation>& annotations() const noexcept {
    return annotations_;
  }
  const ClassRegistry& registry() const noexcept { return registry_; }

  // nullptr when the id is unknown.
  const ImageInfo* find_image(std::string_view id) const;

  bool operator==(const DatasetManifest& other) const {
    return images_ == other.images_ && annotations_ == other.annotations_ &&
           registry_ == other.registry_;
  }

 private:
  std::vector<ImageInfo> images_;
  std::vector<GroundTruthAnnotation> annotations_;
  ClassRegistry registry_;
  detail::StringIndex image_index_;
};

struct ClassDistribution {
  std::vector<std::size_t> counts;  // one entry per registry class
  std::size_t total;
};

ClassDistribution class_distribution(const DatasetManifest& m);

// Image-level split: round(test_fraction * n_images) images go to the test
// side, clamped so both sides keep at least one image. Annotations follow
// their image. Deterministic for a fixed seed (SplitMix64 Fisher-Yates).
std::pair<DatasetManifest, DatasetManifest> split_manifest(
    const DatasetManifest& m, double test_fraction, std::uint64_t seed);

// Content fingerprint over images, classes and annotations. Stable across
// runs and platforms; evaluation reports embed it as the manifest id.
std::string manifest_fingerprint(const DatasetManifest& m);

// Shared entry-point validation for detections evaluated or fused against a
// manifest. Throws UnknownImageError or ValidationError.
void validate_detection_against(const Detection& d, const DatasetManifest& m);

}  // namespace detfuse
