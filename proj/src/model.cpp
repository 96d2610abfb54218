#include "detfuse/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "detfuse/errors.hpp"
#include "detfuse/hash.hpp"
#include "detfuse/rng.hpp"

namespace detfuse {

namespace {

// Slack for annotation boxes that sit on the image border: parse-time
// clamping and fusion leave at most float dust past the edge, far below a
// pixel. Anything larger is a real violation.
constexpr double kBoundsSlack = 1e-6;

}  // namespace

ClassRegistry::ClassRegistry(std::vector<std::string> names)
    : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) {
      throw ValidationError("class labels must be non-empty");
    }
    auto [it, inserted] = index_.emplace(names_[i], i);
    (void)it;
    if (!inserted) {
      throw ValidationError("duplicate class label: " + names_[i]);
    }
  }
}

ClassRegistry ClassRegistry::ead() {
  return ClassRegistry({"specularity", "saturation", "artifact", "blur",
                        "contrast", "bubbles", "instrument", "blood"});
}

const std::string& ClassRegistry::name(std::size_t id) const {
  if (id >= names_.size()) {
    throw ValidationError("class id out of range: " + std::to_string(id));
  }
  return names_[id];
}

std::optional<std::size_t> ClassRegistry::find(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DatasetManifest::DatasetManifest(std::vector<ImageInfo> images,
                                 std::vector<GroundTruthAnnotation> annotations,
                                 ClassRegistry registry)
    : images_(std::move(images)),
      annotations_(std::move(annotations)),
      registry_(std::move(registry)) {
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const ImageInfo& img = images_[i];
    if (img.id.empty()) throw ValidationError("image id must be non-empty");
    if (!(std::isfinite(img.width) && std::isfinite(img.height)) ||
        img.width <= 0.0 || img.height <= 0.0) {
      throw ValidationError("image " + img.id +
                            " has non-positive dimensions");
    }
    auto [it, inserted] = image_index_.emplace(img.id, i);
    (void)it;
    if (!inserted) throw ValidationError("duplicate image id: " + img.id);
  }
  for (const GroundTruthAnnotation& a : annotations_) {
    const ImageInfo* img = find_image(a.image_id);
    if (img == nullptr) {
      throw ValidationError("annotation references unknown image: " +
                            a.image_id);
    }
    if (a.class_id >= registry_.size()) {
      throw ValidationError("annotation on image " + a.image_id +
                            " has an invalid class id");
    }
    if (a.box.right() > img->width + kBoundsSlack ||
        a.box.bottom() > img->height + kBoundsSlack) {
      throw ValidationError("annotation box on image " + a.image_id +
                            " extends beyond the image bounds");
    }
  }
}

const ImageInfo* DatasetManifest::find_image(std::string_view id) const {
  auto it = image_index_.find(id);
  return it == image_index_.end() ? nullptr : &images_[it->second];
}

ClassDistribution class_distribution(const DatasetManifest& m) {
  ClassDistribution dist{std::vector<std::size_t>(m.registry().size(), 0), 0};
  for (const auto& a : m.annotations()) {
    ++dist.counts[a.class_id];
    ++dist.total;
  }
  return dist;
}

std::pair<DatasetManifest, DatasetManifest> split_manifest(
    const DatasetManifest& m, double test_fraction, std::uint64_t seed) {
  const std::size_t n = m.images().size();
  if (n < 2) {
    throw SplitError("cannot split a manifest with fewer than 2 images");
  }
  if (!std::isfinite(test_fraction) ||
      !(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie strictly between 0 and 1");
  }

  std::size_t n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
    std::swap(order[i], order[j]);
  }

  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = true;

  // Both sides keep the original manifest order.
  std::vector<ImageInfo> train_imgs;
  std::vector<ImageInfo> test_imgs;
  detail::StringIndex pos;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test_imgs : train_imgs).push_back(m.images()[i]);
    pos.emplace(m.images()[i].id, i);
  }
  std::vector<GroundTruthAnnotation> train_anns;
  std::vector<GroundTruthAnnotation> test_anns;
  for (const auto& a : m.annotations()) {
    const std::size_t i = pos.find(a.image_id)->second;
    (in_test[i] ? test_anns : train_anns).push_back(a);
  }

  return {DatasetManifest(std::move(train_imgs), std::move(train_anns),
                          m.registry()),
          DatasetManifest(std::move(test_imgs), std::move(test_anns),
                          m.registry())};
}

std::string manifest_fingerprint(const DatasetManifest& m) {
  std::string s;
  s.reserve(64 * (m.images().size() + m.annotations().size()) + 64);
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g|", v);
    s += buf;
  };
  for (const auto& img : m.images()) {
    s += "I|";
    s += img.id;
    s += '|';
    num(img.width);
    num(img.height);
  }
  for (const auto& name : m.registry().names()) {
    s += "C|";
    s += name;
    s += '|';
  }
  for (const auto& a : m.annotations()) {
    s += "A|";
    s += a.image_id;
    s += '|';
    std::snprintf(buf, sizeof(buf), "%zu|", a.class_id);
    s += buf;
    num(a.box.x());
    num(a.box.y());
    num(a.box.w());
    num(a.box.h());
  }
  return to_hex(fnv1a64(s));
}

void validate_detection_against(const Detection& d, const DatasetManifest& m) {
  if (m.find_image(d.image_id) == nullptr) {
    throw UnknownImageError("detection references image absent from manifest: " +
                            d.image_id);
  }
  if (d.class_id >= m.registry().size()) {
    throw ValidationError("detection on image " + d.image_id +
                          " has an invalid class id");
  }
  if (!std::isfinite(d.score) || d.score < 0.0 || d.score > 1.0) {
    throw ValidationError("detection on image " + d.image_id +
                          " has a score outside [0, 1]");
  }
}

}  // namespace detfuse
