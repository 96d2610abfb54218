#pragma once

#include <vector>

#include "detfuse/model.hpp"

namespace detfuse {

enum class NmsMode { class_aware, class_agnostic };

struct NmsConfig {
  double iou_threshold = 0.5;
  NmsMode mode = NmsMode::class_aware;
  double score_floor = 0.0;  // detections with score < floor are dropped first
};

// Greedy hard NMS over one image's detections. Candidates are visited in
// descending score order (ties: earlier input index first); a candidate is
// kept iff its IoU with every previously kept box in scope stays strictly
// below the threshold. In class_aware mode only same-class boxes compete; in
// class_agnostic mode all boxes do. The comparator is `IoU >= threshold
// suppresses`, so a threshold of 1.0 removes exact duplicates only. Kept
// detections are returned unmodified, best score first.
//
// Throws MixedImageError when the input spans several images and ConfigError
// when a threshold lies outside [0, 1].
std::vector<Detection> nms(const std::vector<Detection>& dets,
                           const NmsConfig& cfg);

// Applies nms() image by image (buckets in order of first appearance) and
// reassembles the file.
DetectionFile nms_per_image(const DetectionFile& file, const NmsConfig& cfg);

}  // namespace detfuse
