#include "support/oracles.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace detfuse::oracle {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

long long as_int(double v) {
  const long long i = static_cast<long long>(std::llround(v));
  assert(static_cast<double>(i) == v && "oracle requires integer coordinates");
  return i;
}

}  // namespace

Frac::Frac(long long num, long long den)
    : Frac(Raw128{static_cast<__int128>(num), static_cast<__int128>(den)}) {}

Frac::Frac(Raw128 raw) : num_(raw.num), den_(raw.den) {
  if (den_ == 0) throw std::invalid_argument("zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  const __int128 g = gcd128(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

Frac Frac::operator+(const Frac& o) const {
  return Frac(Raw128{num_ * o.den_ + o.num_ * den_, den_ * o.den_});
}

Frac Frac::operator-(const Frac& o) const {
  return Frac(Raw128{num_ * o.den_ - o.num_ * den_, den_ * o.den_});
}

Frac Frac::operator*(const Frac& o) const {
  return Frac(Raw128{num_ * o.num_, den_ * o.den_});
}

bool Frac::operator<(const Frac& o) const {
  return num_ * o.den_ < o.num_ * den_;
}

double grid_iou(const BoundingBox& a, const BoundingBox& b) {
  const long long ax = as_int(a.x()), ay = as_int(a.y());
  const long long aw = as_int(a.w()), ah = as_int(a.h());
  const long long bx = as_int(b.x()), by = as_int(b.y());
  const long long bw = as_int(b.w()), bh = as_int(b.h());

  const long long x0 = std::min(ax, bx);
  const long long y0 = std::min(ay, by);
  const long long x1 = std::max(ax + aw, bx + bw);
  const long long y1 = std::max(ay + ah, by + bh);

  long long both = 0;
  long long either = 0;
  for (long long cx = x0; cx < x1; ++cx) {
    for (long long cy = y0; cy < y1; ++cy) {
      const bool in_a = cx >= ax && cx < ax + aw && cy >= ay && cy < ay + ah;
      const bool in_b = cx >= bx && cx < bx + bw && cy >= by && cy < by + bh;
      if (in_a && in_b) ++both;
      if (in_a || in_b) ++either;
    }
  }
  return either == 0 ? 0.0
                     : static_cast<double>(both) / static_cast<double>(either);
}

Frac rational_iou(const BoundingBox& a, const BoundingBox& b) {
  const long long ax = as_int(a.x()), ay = as_int(a.y());
  const long long aw = as_int(a.w()), ah = as_int(a.h());
  const long long bx = as_int(b.x()), by = as_int(b.y());
  const long long bw = as_int(b.w()), bh = as_int(b.h());

  const long long iw =
      std::min(ax + aw, bx + bw) - std::max(ax, bx);
  const long long ih =
      std::min(ay + ah, by + bh) - std::max(ay, by);
  if (iw <= 0 || ih <= 0) return Frac(0, 1);
  const long long inter = iw * ih;
  const long long uni = aw * ah + bw * bh - inter;
  return Frac(inter, uni);
}

std::vector<Detection> nms(const std::vector<Detection>& dets,
                           const NmsConfig& cfg) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return dets[a].score > dets[b].score;
                   });

  std::vector<Detection> kept;
  for (const std::size_t i : order) {
    const Detection& cand = dets[i];
    if (cand.score < cfg.score_floor) continue;
    bool keep = true;
    for (const Detection& k : kept) {
      const bool comparable = cfg.mode == NmsMode::class_agnostic ||
                              k.class_id == cand.class_id;
      if (comparable && iou(cand.box, k.box) >= cfg.iou_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(cand);
  }
  return kept;
}

std::vector<std::vector<Detection>> group_members(
    const std::vector<DetectionFile>& per_model, const std::string& image_id,
    std::size_t class_id, double group_iou) {
  struct Item {
    Detection det;
    std::size_t index;
  };
  std::vector<Item> pool;
  for (const DetectionFile& f : per_model) {
    for (std::size_t i = 0; i < f.detections.size(); ++i) {
      const Detection& d = f.detections[i];
      if (d.image_id == image_id && d.class_id == class_id) {
        pool.push_back(Item{d, i});
      }
    }
  }
  std::sort(pool.begin(), pool.end(), [](const Item& a, const Item& b) {
    if (a.det.score != b.det.score) return a.det.score > b.det.score;
    if (a.det.model_id != b.det.model_id) return a.det.model_id < b.det.model_id;
    return a.index < b.index;
  });

  std::vector<std::vector<Detection>> groups;
  std::vector<bool> taken(pool.size(), false);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (taken[i]) continue;
    std::vector<Detection> members{pool[i].det};
    taken[i] = true;
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      if (taken[j]) continue;
      if (iou(pool[i].det.box, pool[j].det.box) >= group_iou) {
        taken[j] = true;
        members.push_back(pool[j].det);
      }
    }
    groups.push_back(std::move(members));
  }
  return groups;
}

EvalScores evaluate(const DetectionFile& dets, const DatasetManifest& manifest,
                    const Frac& threshold) {
  const std::size_t n_classes = manifest.registry().size();

  // Partition annotations and detections by (image, class), keeping input
  // order; detections remember their file index.
  struct Partition {
    std::vector<std::size_t> det_indices;
    std::vector<std::size_t> gt_indices;
  };
  std::map<std::pair<std::string, std::size_t>, Partition> partitions;
  for (std::size_t i = 0; i < manifest.annotations().size(); ++i) {
    const auto& a = manifest.annotations()[i];
    partitions[{a.image_id, a.class_id}].gt_indices.push_back(i);
  }
  for (std::size_t i = 0; i < dets.detections.size(); ++i) {
    const auto& d = dets.detections[i];
    partitions[{d.image_id, d.class_id}].det_indices.push_back(i);
  }

  struct Entry {
    double score;
    std::string image_id;
    std::size_t det_index;
    bool is_tp;
  };
  std::vector<std::vector<Entry>> per_class(n_classes);

  for (auto& [key, p] : partitions) {
    std::sort(p.det_indices.begin(), p.det_indices.end(),
              [&](std::size_t a, std::size_t b) {
                if (dets.detections[a].score != dets.detections[b].score) {
                  return dets.detections[a].score > dets.detections[b].score;
                }
                return a < b;
              });
    std::vector<bool> matched(p.gt_indices.size(), false);
    for (const std::size_t di : p.det_indices) {
      const Detection& d = dets.detections[di];
      Frac best(0, 1);
      std::size_t best_j = p.gt_indices.size();
      for (std::size_t j = 0; j < p.gt_indices.size(); ++j) {
        if (matched[j]) continue;
        const Frac overlap = rational_iou(
            d.box, manifest.annotations()[p.gt_indices[j]].box);
        if (best_j == p.gt_indices.size() || best < overlap) {
          best = overlap;
          best_j = j;
        }
      }
      bool is_tp = false;
      if (best_j != p.gt_indices.size() && threshold <= best) {
        matched[best_j] = true;
        is_tp = true;
      }
      per_class[key.second].push_back(Entry{d.score, key.first, di, is_tp});
    }
  }

  std::vector<std::size_t> n_gt(n_classes, 0);
  for (const auto& a : manifest.annotations()) ++n_gt[a.class_id];

  EvalScores scores;
  scores.per_class_ap.assign(n_classes, std::nullopt);
  double ap_sum = 0.0;
  std::size_t included = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (n_gt[c] == 0) continue;
    auto& entries = per_class[c];
    std::sort(entries.begin(), entries.end(), [](const Entry& a,
                                                 const Entry& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.image_id != b.image_id) return a.image_id < b.image_id;
      return a.det_index < b.det_index;
    });

    const std::size_t n = entries.size();
    std::vector<Frac> precision(n);
    std::vector<Frac> recall(n);
    long long tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (entries[i].is_tp) ++tp;
      precision[i] = Frac(tp, static_cast<long long>(i + 1));
      recall[i] = Frac(tp, static_cast<long long>(n_gt[c]));
    }

    // AP = sum over recall steps of (r_i - r_{i-1}) * max precision at
    // recall >= r_i, evaluated literally.
    Frac ap(0, 1);
    Frac prev_recall(0, 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (!entries[i].is_tp) continue;
      Frac max_prec(0, 1);
      for (std::size_t j = 0; j < n; ++j) {
        if (recall[i] <= recall[j] && max_prec < precision[j]) {
          max_prec = precision[j];
        }
      }
      ap = ap + (recall[i] - prev_recall) * max_prec;
      prev_recall = recall[i];
    }
    scores.per_class_ap[c] = ap;
    ap_sum += ap.to_double();
    ++included;
  }
  scores.map = included == 0 ? 0.0 : ap_sum / static_cast<double>(included);
  return scores;
}

DatasetManifest synthetic_manifest(std::size_t n_images,
                                   std::size_t boxes_per_image,
                                   std::size_t n_classes, std::uint64_t seed) {
  const ClassRegistry full = ClassRegistry::ead();
  std::vector<std::string> names;
  for (std::size_t c = 0; c < n_classes; ++c) {
    names.push_back(c < full.size() ? full.name(c)
                                    : "class_" + std::to_string(c));
  }

  SplitMix64 rng(seed);
  std::vector<ImageInfo> images;
  std::vector<GroundTruthAnnotation> annotations;
  for (std::size_t i = 0; i < n_images; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "img_%04zu", i);
    images.push_back(ImageInfo{id, 640.0, 480.0});
    for (std::size_t b = 0; b < boxes_per_image; ++b) {
      const double w = 16.0 + static_cast<double>(rng.bounded(105));
      const double h = 16.0 + static_cast<double>(rng.bounded(105));
      const double x = static_cast<double>(rng.bounded(
          static_cast<std::uint64_t>(640.0 - w) + 1));
      const double y = static_cast<double>(rng.bounded(
          static_cast<std::uint64_t>(480.0 - h) + 1));
      annotations.push_back(GroundTruthAnnotation{
          id, static_cast<std::size_t>(rng.bounded(n_classes)),
          BoundingBox(x, y, w, h)});
    }
  }
  return DatasetManifest(std::move(images), std::move(annotations),
                         ClassRegistry(std::move(names)));
}

DetectionFile perfect_detections(const DatasetManifest& manifest,
                                 const std::string& model_id, double score) {
  DetectionFile file{model_id, {}};
  for (const auto& a : manifest.annotations()) {
    file.detections.push_back(
        Detection{a.image_id, a.class_id, a.box, score, model_id});
  }
  return file;
}

EvalInstance random_eval_instance(SplitMix64& rng) {
  constexpr double kSide = 48.0;
  const std::size_t n_images = 1 + rng.bounded(5);
  const std::size_t n_classes = 1 + rng.bounded(3);
  const std::size_t n_gt = 1 + rng.bounded(10);
  const std::size_t n_det = rng.bounded(11);

  static const char* kClassNames[] = {"alpha", "beta", "gamma"};
  std::vector<std::string> names(kClassNames, kClassNames + n_classes);

  std::vector<ImageInfo> images;
  for (std::size_t i = 0; i < n_images; ++i) {
    images.push_back(ImageInfo{"img" + std::to_string(i), kSide, kSide});
  }

  const auto random_box = [&]() {
    const long long x = static_cast<long long>(rng.bounded(40));
    const long long y = static_cast<long long>(rng.bounded(40));
    const long long w = 1 + static_cast<long long>(
                                rng.bounded(static_cast<std::uint64_t>(48 - x)));
    const long long h = 1 + static_cast<long long>(
                                rng.bounded(static_cast<std::uint64_t>(48 - y)));
    return BoundingBox(static_cast<double>(x), static_cast<double>(y),
                       static_cast<double>(w), static_cast<double>(h));
  };

  std::vector<GroundTruthAnnotation> annotations;
  for (std::size_t g = 0; g < n_gt; ++g) {
    annotations.push_back(GroundTruthAnnotation{
        images[rng.bounded(n_images)].id,
        static_cast<std::size_t>(rng.bounded(n_classes)), random_box()});
  }

  DatasetManifest manifest(images, annotations,
                           ClassRegistry(std::move(names)));

  DetectionFile dets{"synthdet", {}};
  for (std::size_t d = 0; d < n_det; ++d) {
    const double score =
        static_cast<double>(rng.bounded(17)) / 16.0;  // ties on purpose
    if (rng.bounded(100) < 60) {
      // Perturbed copy of a random annotation: overlaps stay frequent.
      const auto& a = annotations[rng.bounded(annotations.size())];
      const auto nudge = [&](double v, double lo, double hi) {
        const long long delta = static_cast<long long>(rng.bounded(9)) - 4;
        return std::clamp(v + static_cast<double>(delta), lo, hi);
      };
      const double x = nudge(a.box.x(), 0.0, 40.0);
      const double y = nudge(a.box.y(), 0.0, 40.0);
      const double w =
          std::clamp(nudge(a.box.w(), 1.0, kSide), 1.0, kSide - x);
      const double h =
          std::clamp(nudge(a.box.h(), 1.0, kSide), 1.0, kSide - y);
      const std::size_t class_id =
          rng.bounded(100) < 80
              ? a.class_id
              : static_cast<std::size_t>(rng.bounded(n_classes));
      dets.detections.push_back(Detection{
          a.image_id, class_id, BoundingBox(x, y, w, h), score, "synthdet"});
    } else {
      dets.detections.push_back(Detection{
          manifest.images()[rng.bounded(n_images)].id,
          static_cast<std::size_t>(rng.bounded(n_classes)), random_box(),
          score, "synthdet"});
    }
  }
  return EvalInstance{std::move(manifest), std::move(dets)};
}

std::vector<Detection> random_nms_input(SplitMix64& rng,
                                        std::size_t max_boxes) {
  const std::size_t n = rng.bounded(max_boxes + 1);
  std::vector<Detection> dets;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(rng.bounded(30));
    const double y = static_cast<double>(rng.bounded(30));
    const double w = 1.0 + static_cast<double>(rng.bounded(20));
    const double h = 1.0 + static_cast<double>(rng.bounded(20));
    dets.push_back(Detection{
        "img0", static_cast<std::size_t>(rng.bounded(3)),
        BoundingBox(x, y, w, h),
        static_cast<double>(rng.bounded(9)) / 8.0,  // grid scores force ties
        "m0"});
  }
  return dets;
}

}  // namespace detfuse::oracle
