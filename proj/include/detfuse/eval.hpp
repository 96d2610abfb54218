#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detfuse/model.hpp"

namespace detfuse {

// Matching threshold; valid values lie in (0, 1]. The canonical evaluation
// triple is 0.25 / 0.50 / 0.75.
struct IouThreshold {
  double value;
};

inline constexpr double kCanonicalIous[] = {0.25, 0.50, 0.75};

enum class Verdict { tp, fp };

struct DetectionVerdict {
  std::size_t det_index;  // position in the input detection list
  Verdict verdict;
  std::optional<std::size_t> annotation_index;  // set for true positives
  double best_iou;  // IoU with the matched (TP) or best unmatched (FP) box
};

struct MatchResult {
  std::vector<DetectionVerdict> detections;  // one per detection, input order
  std::vector<bool> annotation_matched;      // one per annotation
};

// Greedy matching within one (image, class) partition: detections are
// processed in descending score order (ties: input index) and claim the
// unmatched annotation with the highest IoU (ties: lower annotation index),
// provided that IoU reaches the threshold. Each annotation matches at most
// once. Throws PartitionError when the input mixes images or classes.
MatchResult match(const std::vector<Detection>& dets,
                  const std::vector<GroundTruthAnnotation>& gts,
                  IouThreshold t);

// One detection's contribution to a class-level PR curve.
struct ScoredVerdict {
  double score;
  std::string image_id;
  std::size_t det_index;  // input index within the detection file
  bool is_tp;
};

struct PrPoint {
  double recall;
  double precision;
};

struct ApResult {
  double ap;
  std::vector<PrPoint> pr;  // curve samples at each true-positive step
};

// all_point: exact area under the interpolated PR curve; coco_101: mean of
// the interpolated precision sampled at recalls 0.00, 0.01, ..., 1.00.
enum class Interpolation { all_point, coco_101 };

// AP for one class across all images. Verdicts are sorted globally by
// descending score (ties: image id, then input index). Returns nullopt when
// the class has no ground truth; such classes are excluded from mAP.
std::optional<ApResult> average_precision(std::vector<ScoredVerdict> verdicts,
                                          std::size_t n_gt,
                                          Interpolation interp);

struct ClassEval {
  std::size_t class_id;
  std::size_t n_gt;
  std::optional<ApResult> result;  // nullopt: class absent from ground truth
};

struct ThresholdEval {
  double iou;
  double map;  // mean AP over classes with at least one ground-truth box
  std::vector<ClassEval> classes;  // registry order, every class listed
};

struct EvalConfig {
  std::vector<double> thresholds{0.25, 0.50, 0.75};
  Interpolation interpolation = Interpolation::all_point;
};

// Canonical hash of the resolved evaluation settings, independent of how the
// caller spelled or ordered its flags.
std::string eval_config_hash(const EvalConfig& cfg);

struct EvalReport {
  std::string tool;
  std::string version;
  std::string config_hash;
  std::string detections_id;  // model id of the scored detection file
  std::string manifest_id;    // manifest fingerprint
  std::vector<std::string> class_names;
  std::vector<ThresholdEval> thresholds;
};

// Scores a detection file against the manifest at every threshold. Values in
// the report are fractions in [0, 1]; table renderings scale to percent.
// Throws EvalError when the manifest has no annotations at all.
EvalReport evaluate(const DetectionFile& dets, const DatasetManifest& manifest,
                    const EvalConfig& cfg = {});

}  // namespace detfuse
