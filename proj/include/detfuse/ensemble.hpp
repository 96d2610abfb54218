#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "detfuse/model.hpp"
#include "detfuse/nms.hpp"

namespace detfuse {

// affirmative: one model is enough; consensus: strictly more than half of the
// models; unanimous: every model. With exactly two models consensus and
// unanimous coincide.
enum class VotingStrategy { affirmative, consensus, unanimous };

struct EnsembleConfig {
  VotingStrategy strategy = VotingStrategy::consensus;
  double group_iou = 0.5;
  // Per-model, per-image NMS before grouping; nullopt skips the stage.
  std::optional<NmsConfig> nms = NmsConfig{};
};

// A cluster of same-image, same-class detections that are treated as one
// object. `fused` stays empty until the group survives voting.
struct FusedGroup {
  std::vector<Detection> members;
  std::set<std::string> supporting_models;
  std::optional<Detection> fused;
};

// Votes a strategy needs with n_models participating.
std::size_t votes_required(VotingStrategy strategy, std::size_t n_models);

// Greedy clustering of one (image, class) partition across all models: pool
// the detections, sort by descending score (ties: model id, then input
// index), then repeatedly seed a group with the best unassigned detection and
// absorb every unassigned detection whose IoU with the seed reaches
// group_iou. Every input detection lands in exactly one group.
std::vector<FusedGroup> group_detections(
    const std::vector<DetectionFile>& per_model, std::string_view image_id,
    std::size_t class_id, double group_iou);

// Keeps the groups whose distinct supporting models reach the strategy's
// quota and computes their fused detection. Throws ConfigError when
// n_models is 0.
std::vector<FusedGroup> vote(std::vector<FusedGroup> groups,
                             VotingStrategy strategy, std::size_t n_models);

// Score-weighted average of the member boxes (weights score_i / sum(score),
// uniform when all scores are 0), arithmetic-mean score, model_id "ensemble".
Detection fuse_group(const FusedGroup& g);

// Full pipeline: per-model NMS, per-(image, class) grouping, voting, fusion.
// Output is sorted by (image_id, descending score) and carries model_id
// "ensemble". Deterministic; permuting the input files does not change it.
DetectionFile run_ensemble(const std::vector<DetectionFile>& per_model,
                           const DatasetManifest& manifest,
                           const EnsembleConfig& cfg);

}  // namespace detfuse
