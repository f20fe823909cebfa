#pragma once

#include <string>
#include <vector>

#include "wsg/corpus.hpp"

namespace wsg::synthetic {

// Knobs for the planted-correspondence generator. Defaults are the
// desk-scale setup used by the quantitative checks.
struct SynthConfig {
  int num_train = 500;
  int num_val = 100;
  int num_test = 100;

  int M = 20;           // proposals per image
  int n_min = 2;        // phrases per caption
  int n_max = 3;
  int d = 32;           // feature dimension (>= 8)
  int num_concepts = 12;
  double image_w = 128.0;
  double image_h = 128.0;

  // Fraction of eligible phrases that receive a same-concept distractor
  // mirrored across the preceding phrase's box, so it violates the
  // caption's predicate while appearance, size, and distance to the
  // partner stay identical. The first phrase of a caption is exempt:
  // its relation word would come after its span, where the causal
  // sentence encoder cannot see it, making the ambiguity unresolvable
  // in principle rather than hard.
  double rho = 0.0;

  double feature_noise = 0.03; // stddev on appearance/content dims

  // Jitter mode: the exact gt box is replaced by `true_copies` jittered
  // versions with IoU against gt in [jitter_iou_lo, jitter_iou_hi].
  bool jitter = false;
  double jitter_iou_lo = 0.45;
  double jitter_iou_hi = 0.65;
  int true_copies = 3;

  // Scales of the derived feature blocks; see layout note below.
  double geo_scale = 0.25;
  double content_scale = 0.25;

  // How strongly a badly-cut crop degrades the appearance block: the
  // prototype is scaled by 1 - content_degrade*(1 - IoU(box, object)).
  // A perfectly aligned proposal keeps the full prototype; a half-
  // overlapping crop carries a visibly weaker one. This couples match
  // confidence to localization quality, which is what makes the most
  // confident proposal worth imitating as a regression target.
  double content_degrade = 0.5;

  int min_freq = 1; // relation-vocabulary frequency threshold
};

// Feature layout (d dims total):
//   [0 .. d-8)   appearance: unit concept prototype, scaled down with
//                crop misalignment (see content_degrade), + noise
//   [d-8 .. d-4) content: offset encoding from the proposal box to the
//                object it covers, scaled by content_scale, + noise.
//                This is the stand-in for "where the object sits inside
//                the crop": an exact or self-contained box has content
//                ~0, a jittered box carries the correction back to gt.
//   [d-4 .. d)   geometry: (cx/W, cy/H, w/W, h/H) * geo_scale
struct SynthResult {
  corpus::Corpus train, val, test;
  corpus::RelationVocabulary relation_vocab;
  std::vector<std::vector<double>> prototypes; // num_concepts x (d-8), for test oracles
  int vocab_size = 0;                          // word-id universe V
};

// Deterministic given (config, seed). Throws std::runtime_error on
// infeasible geometry (more planted boxes than fit, or no valid
// placement within the retry budget).
SynthResult generate_synthetic(const SynthConfig& config, uint64_t seed);

// Word-id layout helpers (V = 3*C + 4): each concept owns three
// consecutive ids (head word plus two modifiers), followed by four
// shared relation words — captions place the predicate word between
// consecutive phrase spans, the way "the ball left of the cube" does.
int head_word(int concept_id);
int modifier_word(int concept_id, int which);
int relation_word(int num_concepts, int predicate);
int word_universe(int num_concepts);

}  // namespace wsg::synthetic
