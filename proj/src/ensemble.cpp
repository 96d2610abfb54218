#include "detfuse/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "detfuse/errors.hpp"

namespace detfuse {

namespace {

struct Entry {
  const Detection* det;
  std::size_t index;  // position within its model's detection list
};

// Sort keys use detection-level fields only (never file order), so permuting
// the input files cannot change the grouping.
bool entry_before(const Entry& a, const Entry& b) {
  if (a.det->score != b.det->score) return a.det->score > b.det->score;
  if (a.det->model_id != b.det->model_id) {
    return a.det->model_id < b.det->model_id;
  }
  return a.index < b.index;
}

std::vector<FusedGroup> group_entries(std::vector<Entry> pool,
                                      double group_iou) {
  std::sort(pool.begin(), pool.end(), entry_before);

  std::vector<FusedGroup> groups;
  std::vector<bool> assigned(pool.size(), false);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (assigned[i]) continue;
    FusedGroup g;
    const Detection& seed = *pool[i].det;
    for (std::size_t j = i; j < pool.size(); ++j) {
      if (assigned[j]) continue;
      if (j != i && iou(seed.box, pool[j].det->box) < group_iou) continue;
      assigned[j] = true;
      g.members.push_back(*pool[j].det);
      g.supporting_models.insert(pool[j].det->model_id);
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

void check_distinct_model_ids(const std::vector<DetectionFile>& per_model) {
  std::set<std::string> ids;
  for (const DetectionFile& f : per_model) {
    if (f.model_id.empty()) {
      throw ValidationError("detection file has an empty model id");
    }
    if (!ids.insert(f.model_id).second) {
      throw ConfigError("duplicate model id across detection files: " +
                        f.model_id);
    }
  }
}

void check_group_iou(double group_iou) {
  if (!std::isfinite(group_iou) || group_iou < 0.0 || group_iou > 1.0) {
    throw ConfigError("group iou must lie in [0, 1]");
  }
}

}  // namespace

std::size_t votes_required(VotingStrategy strategy, std::size_t n_models) {
  if (n_models == 0) throw ConfigError("ensemble needs at least one model");
  switch (strategy) {
    case VotingStrategy::affirmative:
      return 1;
    case VotingStrategy::consensus:
      // Strict majority: with an even model count, half is not enough.
      return n_models / 2 + 1;
    case VotingStrategy::unanimous:
      return n_models;
  }
  throw ConfigError("unknown voting strategy");
}

std::vector<FusedGroup> group_detections(
    const std::vector<DetectionFile>& per_model, std::string_view image_id,
    std::size_t class_id, double group_iou) {
  check_group_iou(group_iou);
  check_distinct_model_ids(per_model);

  std::vector<Entry> pool;
  for (const DetectionFile& f : per_model) {
    for (std::size_t i = 0; i < f.detections.size(); ++i) {
      const Detection& d = f.detections[i];
      if (d.image_id == image_id && d.class_id == class_id) {
        pool.push_back(Entry{&d, i});
      }
    }
  }
  return group_entries(std::move(pool), group_iou);
}

std::vector<FusedGroup> vote(std::vector<FusedGroup> groups,
                             VotingStrategy strategy, std::size_t n_models) {
  const std::size_t needed = votes_required(strategy, n_models);
  std::vector<FusedGroup> kept;
  for (FusedGroup& g : groups) {
    if (g.supporting_models.size() < needed) continue;
    g.fused = fuse_group(g);
    kept.push_back(std::move(g));
  }
  return kept;
}

Detection fuse_group(const FusedGroup& g) {
  if (g.members.empty()) {
    throw ValidationError("cannot fuse an empty group");
  }

  double score_sum = 0.0;
  for (const Detection& d : g.members) score_sum += d.score;

  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
  for (const Detection& d : g.members) {
    // Uniform weights when every member scored 0, else score-proportional.
    const double weight = score_sum > 0.0
                              ? d.score / score_sum
                              : 1.0 / static_cast<double>(g.members.size());
    x += weight * d.box.x();
    y += weight * d.box.y();
    w += weight * d.box.w();
    h += weight * d.box.h();
  }

  const Detection& first = g.members.front();
  return Detection{first.image_id, first.class_id, BoundingBox(x, y, w, h),
                   score_sum / static_cast<double>(g.members.size()),
                   "ensemble"};
}

DetectionFile run_ensemble(const std::vector<DetectionFile>& per_model,
                           const DatasetManifest& manifest,
                           const EnsembleConfig& cfg) {
  if (per_model.empty()) {
    throw ConfigError("ensemble needs at least one detection file");
  }
  check_group_iou(cfg.group_iou);
  check_distinct_model_ids(per_model);
  for (const DetectionFile& f : per_model) {
    for (const Detection& d : f.detections) {
      if (d.model_id != f.model_id) {
        throw ValidationError("detection carries model id '" + d.model_id +
                              "' inside file for model '" + f.model_id + "'");
      }
      validate_detection_against(d, manifest);
    }
  }

  std::vector<DetectionFile> filtered;
  filtered.reserve(per_model.size());
  for (const DetectionFile& f : per_model) {
    filtered.push_back(cfg.nms ? nms_per_image(f, *cfg.nms) : f);
  }

  // One pass to bucket the surviving detections per (image, class); the map
  // ordering makes the partition iteration deterministic.
  std::map<std::pair<std::string, std::size_t>, std::vector<Entry>> buckets;
  for (const DetectionFile& f : filtered) {
    for (std::size_t i = 0; i < f.detections.size(); ++i) {
      const Detection& d = f.detections[i];
      buckets[{d.image_id, d.class_id}].push_back(Entry{&d, i});
    }
  }

  DetectionFile out{"ensemble", {}};
  const std::size_t n_models = per_model.size();
  for (auto& [key, pool] : buckets) {
    auto groups = vote(group_entries(std::move(pool), cfg.group_iou),
                       cfg.strategy, n_models);
    for (FusedGroup& g : groups) {
      out.detections.push_back(std::move(*g.fused));
    }
  }

  std::sort(out.detections.begin(), out.detections.end(),
            [](const Detection& a, const Detection& b) {
              if (a.image_id != b.image_id) return a.image_id < b.image_id;
              if (a.score != b.score) return a.score > b.score;
              if (a.class_id != b.class_id) return a.class_id < b.class_id;
              return std::tuple(a.box.x(), a.box.y(), a.box.w(), a.box.h()) <
                     std::tuple(b.box.x(), b.box.y(), b.box.w(), b.box.h());
            });
  return out;
}

}  // namespace detfuse
