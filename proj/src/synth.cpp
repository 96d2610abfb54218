#include "detfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "detfuse/errors.hpp"
#include "detfuse/rng.hpp"

namespace detfuse {

namespace {

constexpr double kMinSide = 1e-3;  // floor for jittered extents, in pixels

void validate_config(const PerturbConfig& cfg) {
  if (!std::isfinite(cfg.jitter) || cfg.jitter < 0.0) {
    throw ConfigError("jitter must be >= 0");
  }
  if (!std::isfinite(cfg.drop_rate) || cfg.drop_rate < 0.0 ||
      cfg.drop_rate > 1.0) {
    throw ConfigError("drop rate must lie in [0, 1]");
  }
  if (!std::isfinite(cfg.fp_rate) || cfg.fp_rate < 0.0 ||
      cfg.fp_rate > 100.0) {
    throw ConfigError("fp rate must lie in [0, 100]");
  }
  if (!std::isfinite(cfg.score_model.base) || cfg.score_model.base < 0.0 ||
      cfg.score_model.base > 1.0) {
    throw ConfigError("score model base must lie in [0, 1]");
  }
  if (!std::isfinite(cfg.score_model.decay) || cfg.score_model.decay < 0.0) {
    throw ConfigError("score model decay must be >= 0");
  }
}

std::size_t poisson(SplitMix64& rng, double lambda) {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  std::size_t k = 0;
  double p = 1.0;
  do {
    p *= rng.uniform01();
    ++k;
  } while (p > limit);
  return k - 1;
}

// Clamps only when the box actually violates the image bounds, so untouched
// boxes come through bit-identical. The nextafter loops absorb the float
// dust that x + w can pick up after clamping an edge.
BoundingBox clamp_into_image(double x, double y, double w, double h,
                             const ImageInfo& img) {
  w = std::clamp(w, std::min(kMinSide, img.width), img.width);
  h = std::clamp(h, std::min(kMinSide, img.height), img.height);
  if (x < 0.0) x = 0.0;
  if (y < 0.0) y = 0.0;
  if (x + w > img.width) {
    x = img.width - w;
    if (x < 0.0) x = 0.0;
    while (x + w > img.width) w = std::nextafter(w, 0.0);
  }
  if (y + h > img.height) {
    y = img.height - h;
    if (y < 0.0) y = 0.0;
    while (y + h > img.height) h = std::nextafter(h, 0.0);
  }
  return BoundingBox(x, y, w, h);
}

}  // namespace

DetectionFile generate(const DatasetManifest& manifest,
                       const PerturbConfig& cfg, std::string model_id) {
  validate_config(cfg);
  if (model_id.empty()) throw ConfigError("model id must be non-empty");

  // Annotations bucketed per image, manifest order preserved.
  std::vector<std::vector<const GroundTruthAnnotation*>> per_image(
      manifest.images().size());
  {
    detail::StringIndex pos;
    for (std::size_t i = 0; i < manifest.images().size(); ++i) {
      pos.emplace(manifest.images()[i].id, i);
    }
    for (const auto& a : manifest.annotations()) {
      per_image[pos.find(a.image_id)->second].push_back(&a);
    }
  }

  DetectionFile out{model_id, {}};
  for (std::size_t i = 0; i < manifest.images().size(); ++i) {
    const ImageInfo& img = manifest.images()[i];
    SplitMix64 rng(SplitMix64::derive(cfg.seed, i));

    for (const GroundTruthAnnotation* a : per_image[i]) {
      if (rng.uniform01() < cfg.drop_rate) continue;

      const double bw = a->box.w();
      const double bh = a->box.h();
      const double dx = rng.uniform(-1.0, 1.0) * cfg.jitter * bw;
      const double dy = rng.uniform(-1.0, 1.0) * cfg.jitter * bh;
      const double dw = rng.uniform(-1.0, 1.0) * cfg.jitter * bw;
      const double dh = rng.uniform(-1.0, 1.0) * cfg.jitter * bh;

      const BoundingBox box = clamp_into_image(
          a->box.x() + dx, a->box.y() + dy, bw + dw, bh + dh, img);

      // Relative displacement drives the confidence down.
      const double displacement =
          (std::abs(dx) / bw + std::abs(dy) / bh + std::abs(dw) / bw +
           std::abs(dh) / bh) /
          4.0;
      const double score =
          std::clamp(cfg.score_model.base *
                         (1.0 - cfg.score_model.decay * displacement),
                     0.0, 1.0);

      out.detections.push_back(
          Detection{img.id, a->class_id, box, score, model_id});
    }

    const std::size_t n_fp = poisson(rng, cfg.fp_rate);
    for (std::size_t f = 0; f < n_fp; ++f) {
      const double w = rng.uniform(0.05, 0.35) * img.width;
      const double h = rng.uniform(0.05, 0.35) * img.height;
      const double x = rng.uniform01() * (img.width - w);
      const double y = rng.uniform01() * (img.height - h);
      const std::size_t class_id =
          static_cast<std::size_t>(rng.bounded(manifest.registry().size()));
      const double score = rng.uniform(0.05, 0.30);
      out.detections.push_back(Detection{
          img.id, class_id, clamp_into_image(x, y, w, h, img), score,
          model_id});
    }
  }
  return out;
}

}  // namespace detfuse
