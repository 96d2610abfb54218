#include "detfuse/nms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detfuse/errors.hpp"

namespace detfuse {

namespace {

void validate_config(const NmsConfig& cfg) {
  if (!std::isfinite(cfg.iou_threshold) || cfg.iou_threshold < 0.0 ||
      cfg.iou_threshold > 1.0) {
    throw ConfigError("nms iou threshold must lie in [0, 1]");
  }
  if (!std::isfinite(cfg.score_floor) || cfg.score_floor < 0.0 ||
      cfg.score_floor > 1.0) {
    throw ConfigError("nms score floor must lie in [0, 1]");
  }
}

}  // namespace

std::vector<Detection> nms(const std::vector<Detection>& dets,
                           const NmsConfig& cfg) {
  validate_config(cfg);
  for (const Detection& d : dets) {
    if (d.image_id != dets.front().image_id) {
      throw MixedImageError("nms input spans multiple images: " +
                            dets.front().image_id + " and " + d.image_id);
    }
  }

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return a < b;
  });

  std::vector<std::size_t> kept;
  for (const std::size_t i : order) {
    const Detection& cand = dets[i];
    if (cand.score < cfg.score_floor) continue;
    bool suppressed = false;
    for (const std::size_t k : kept) {
      const Detection& keeper = dets[k];
      if (cfg.mode == NmsMode::class_aware &&
          keeper.class_id != cand.class_id) {
        continue;
      }
      if (iou(cand.box, keeper.box) >= cfg.iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(i);
  }

  std::vector<Detection> out;
  out.reserve(kept.size());
  for (const std::size_t i : kept) out.push_back(dets[i]);
  return out;
}

DetectionFile nms_per_image(const DetectionFile& file, const NmsConfig& cfg) {
  // Bucket by image in order of first appearance; indices within a bucket
  // keep their relative input order, so tie-breaks stay deterministic.
  std::vector<std::string> image_order;
  detail::StringIndex index;
  std::vector<std::vector<Detection>> buckets;
  for (const Detection& d : file.detections) {
    auto it = index.find(d.image_id);
    if (it == index.end()) {
      index.emplace(d.image_id, buckets.size());
      image_order.push_back(d.image_id);
      buckets.emplace_back();
      it = index.find(d.image_id);
    }
    buckets[it->second].push_back(d);
  }

  DetectionFile out{file.model_id, {}};
  out.detections.reserve(file.detections.size());
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    for (Detection& d : nms(buckets[b], cfg)) {
      out.detections.push_back(std::move(d));
    }
  }
  return out;
}

}  // namespace detfuse
