#include "detfuse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "detfuse/errors.hpp"
#include "detfuse/hash.hpp"
#include "detfuse/version.hpp"

namespace detfuse {

namespace {

void check_threshold(double value) {
  if (!std::isfinite(value) || !(value > 0.0 && value <= 1.0)) {
    throw ConfigError("iou threshold must lie in (0, 1]");
  }
}

}  // namespace

MatchResult match(const std::vector<Detection>& dets,
                  const std::vector<GroundTruthAnnotation>& gts,
                  IouThreshold t) {
  check_threshold(t.value);

  for (const Detection& d : dets) {
    if (d.image_id != dets.front().image_id ||
        d.class_id != dets.front().class_id) {
      throw PartitionError("match input mixes detection partitions");
    }
  }
  for (const GroundTruthAnnotation& g : gts) {
    if (g.image_id != gts.front().image_id ||
        g.class_id != gts.front().class_id) {
      throw PartitionError("match input mixes annotation partitions");
    }
  }
  if (!dets.empty() && !gts.empty() &&
      (dets.front().image_id != gts.front().image_id ||
       dets.front().class_id != gts.front().class_id)) {
    throw PartitionError(
        "detections and annotations belong to different partitions");
  }

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return a < b;
  });

  MatchResult result;
  result.detections.resize(dets.size());
  result.annotation_matched.assign(gts.size(), false);

  for (const std::size_t i : order) {
    double best_iou = 0.0;
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (result.annotation_matched[j]) continue;
      const double overlap = iou(dets[i].box, gts[j].box);
      if (overlap > best_iou) {  // strict: IoU ties keep the lower gt index
        best_iou = overlap;
        best = j;
      }
    }
    if (best && best_iou >= t.value) {
      result.annotation_matched[*best] = true;
      result.detections[i] =
          DetectionVerdict{i, Verdict::tp, best, best_iou};
    } else {
      result.detections[i] =
          DetectionVerdict{i, Verdict::fp, std::nullopt, best_iou};
    }
  }
  return result;
}

std::optional<ApResult> average_precision(std::vector<ScoredVerdict> verdicts,
                                          std::size_t n_gt,
                                          Interpolation interp) {
  if (n_gt == 0) return std::nullopt;  // class skipped, excluded from mAP

  std::sort(verdicts.begin(), verdicts.end(),
            [](const ScoredVerdict& a, const ScoredVerdict& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.image_id != b.image_id) return a.image_id < b.image_id;
              return a.det_index < b.det_index;
            });

  const std::size_t n = verdicts.size();
  std::vector<std::size_t> tp_prefix(n);
  std::size_t tp = 0;
  ApResult out{0.0, {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (verdicts[i].is_tp) {
      ++tp;
      out.pr.push_back(
          PrPoint{static_cast<double>(tp) / static_cast<double>(n_gt),
                  static_cast<double>(tp) / static_cast<double>(i + 1)});
    }
    tp_prefix[i] = tp;
  }

  if (interp == Interpolation::all_point) {
    // Every true positive raises recall by exactly 1/n_gt, and the
    // interpolated precision at that recall is the running maximum of the
    // precisions to the right. A perfect detector therefore sums n_gt ones
    // and divides once, which keeps the identity mAP == 1.0 exact.
    double max_prec = 0.0;
    double sum = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      const double prec = static_cast<double>(tp_prefix[i]) /
                          static_cast<double>(i + 1);
      max_prec = std::max(max_prec, prec);
      if (verdicts[i].is_tp) sum += max_prec;
    }
    out.ap = sum / static_cast<double>(n_gt);
  } else {
    // 101-point sampling: mean interpolated precision at recall levels
    // 0.00, 0.01, ..., 1.00.
    std::vector<double> recalls(n);
    std::vector<double> max_prec_from(n);
    double max_prec = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      recalls[i] = static_cast<double>(tp_prefix[i]) /
                   static_cast<double>(n_gt);
      max_prec = std::max(max_prec, static_cast<double>(tp_prefix[i]) /
                                        static_cast<double>(i + 1));
      max_prec_from[i] = max_prec;
    }
    double sum = 0.0;
    for (int level = 0; level <= 100; ++level) {
      const double r = static_cast<double>(level) / 100.0;
      const auto it = std::lower_bound(recalls.begin(), recalls.end(), r);
      if (it != recalls.end()) {
        sum += max_prec_from[static_cast<std::size_t>(it - recalls.begin())];
      }
    }
    out.ap = sum / 101.0;
  }
  return out;
}

std::string eval_config_hash(const EvalConfig& cfg) {
  std::string s = "iou=";
  char buf[64];
  for (const double t : cfg.thresholds) {
    std::snprintf(buf, sizeof(buf), "%.17g,", t);
    s += buf;
  }
  s += ";interp=";
  s += cfg.interpolation == Interpolation::all_point ? "all_point" : "coco_101";
  return to_hex(fnv1a64(s));
}

EvalReport evaluate(const DetectionFile& dets, const DatasetManifest& manifest,
                    const EvalConfig& cfg) {
  if (cfg.thresholds.empty()) {
    throw ConfigError("evaluation needs at least one iou threshold");
  }
  for (const double t : cfg.thresholds) check_threshold(t);
  if (manifest.annotations().empty()) {
    throw EvalError("manifest has no ground-truth annotations to score against");
  }
  for (const Detection& d : dets.detections) {
    if (d.model_id != dets.model_id) {
      throw ValidationError("detection carries model id '" + d.model_id +
                            "' inside file for model '" + dets.model_id + "'");
    }
    validate_detection_against(d, manifest);
  }

  const std::size_t n_classes = manifest.registry().size();

  // Materialize the (image, class) partitions once; they are reused for
  // every threshold. Detections remember their input index for tie-breaks.
  struct Partition {
    std::vector<Detection> dets;
    std::vector<std::size_t> det_indices;
    std::vector<GroundTruthAnnotation> gts;
  };
  std::map<std::pair<std::string, std::size_t>, Partition> partitions;
  for (const auto& a : manifest.annotations()) {
    partitions[{a.image_id, a.class_id}].gts.push_back(a);
  }
  for (std::size_t i = 0; i < dets.detections.size(); ++i) {
    const Detection& d = dets.detections[i];
    Partition& p = partitions[{d.image_id, d.class_id}];
    p.dets.push_back(d);
    p.det_indices.push_back(i);
  }

  std::vector<std::size_t> gt_per_class(n_classes, 0);
  for (const auto& a : manifest.annotations()) ++gt_per_class[a.class_id];

  EvalReport report;
  report.tool = std::string(kToolName);
  report.version = std::string(kToolVersion);
  report.config_hash = eval_config_hash(cfg);
  report.detections_id = dets.model_id;
  report.manifest_id = manifest_fingerprint(manifest);
  report.class_names = manifest.registry().names();

  for (const double threshold : cfg.thresholds) {
    std::vector<std::vector<ScoredVerdict>> per_class(n_classes);
    for (const auto& [key, p] : partitions) {
      if (p.dets.empty()) continue;
      const MatchResult result = match(p.dets, p.gts, IouThreshold{threshold});
      auto& sink = per_class[key.second];
      for (std::size_t i = 0; i < p.dets.size(); ++i) {
        sink.push_back(ScoredVerdict{
            p.dets[i].score, p.dets[i].image_id, p.det_indices[i],
            result.detections[i].verdict == Verdict::tp});
      }
    }

    ThresholdEval te{threshold, 0.0, {}};
    double ap_sum = 0.0;
    std::size_t included = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      ClassEval ce{c, gt_per_class[c], std::nullopt};
      if (gt_per_class[c] > 0) {
        ce.result = average_precision(std::move(per_class[c]), gt_per_class[c],
                                      cfg.interpolation);
        ap_sum += ce.result->ap;
        ++included;
      }
      te.classes.push_back(std::move(ce));
    }
    te.map = ap_sum / static_cast<double>(included);
    report.thresholds.push_back(std::move(te));
  }
  return report;
}

}  // namespace detfuse
