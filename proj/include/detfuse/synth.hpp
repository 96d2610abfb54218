#pragma once

#include <cstdint>
#include <string>

#include "detfuse/model.hpp"

namespace detfuse {

// Maps the relative displacement actually applied to a box to a confidence:
// score = clamp01(base * (1 - decay * displacement)).
struct ScoreModel {
  double base = 0.95;
  double decay = 1.0;
};

struct PerturbConfig {
  std::uint64_t seed = 0;
  double jitter = 0.0;     // noise amplitude as a fraction of box size
  double drop_rate = 0.0;  // probability of losing a ground-truth box
  double fp_rate = 0.0;    // expected false positives per image (Poisson)
  ScoreModel score_model;
};

// Turns ground truth into a pseudo-model detection file: every annotation
// survives with probability 1 - drop_rate and gets its coordinates jittered
// by uniform noise of amplitude jitter * (w, h), clamped to the image;
// Poisson(fp_rate) low-score false positives are added per image. Each image
// draws from its own derived SplitMix64 stream, so output is deterministic
// for a fixed (manifest, config) and independent of processing order. With
// jitter, drop_rate and fp_rate all zero the boxes reproduce the ground
// truth exactly.
DetectionFile generate(const DatasetManifest& manifest,
                       const PerturbConfig& cfg, std::string model_id);

}  // namespace detfuse
