#include "wsg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "wsg/rng.hpp"

namespace wsg::synthetic {

namespace {

const char* const kPredicates[4] = {"left_of", "right_of", "above", "below"};

// Geometric predicate of "a <pred> b" from the dominant center
// displacement. Image y grows downward, so smaller cy means "above".
int predicate_of(const geom::Box& a, const geom::Box& b) {
  double dx = b.center_x() - a.center_x();
  double dy = b.center_y() - a.center_y();
  if (std::abs(dx) >= std::abs(dy)) return dx > 0.0 ? 0 : 1;
  return dy > 0.0 ? 2 : 3;
}

geom::Box box_from_center(double cx, double cy, double w, double h) {
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

bool inside(const geom::Box& b, double W, double H) {
  return b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= W && b.y2 <= H;
}

geom::Box random_box(Rng& rng, double W, double H) {
  double smin = 0.18 * std::min(W, H), smax = 0.32 * std::min(W, H);
  double w = rng.uniform(smin, smax);
  double h = rng.uniform(smin, smax);
  double x1 = rng.uniform(0.0, W - w);
  double y1 = rng.uniform(0.0, H - h);
  return {x1, y1, x1 + w, y1 + h};
}

// Feature vector for a proposal box whose underlying object occupies
// object_box (the box itself for whole-object proposals; the planted
// gt for jittered crops). See the layout note in the header.
std::vector<double> make_feature(const std::vector<double>& proto, const geom::Box& box,
                                 const geom::Box& object_box, const SynthConfig& cfg, Rng& rng) {
  std::vector<double> f;
  f.reserve(size_t(cfg.d));
  double align = geom::iou(box, object_box);
  double scale = 1.0 - cfg.content_degrade * (1.0 - align);
  for (double p : proto) f.push_back(p * scale + rng.normal(0.0, cfg.feature_noise));
  geom::Offset off = geom::encode_offset(box, object_box);
  for (double v : {off.tx, off.ty, off.tw, off.th})
    f.push_back(v * cfg.content_scale + rng.normal(0.0, cfg.feature_noise));
  f.push_back(box.center_x() / cfg.image_w * cfg.geo_scale);
  f.push_back(box.center_y() / cfg.image_h * cfg.geo_scale);
  f.push_back(box.width() / cfg.image_w * cfg.geo_scale);
  f.push_back(box.height() / cfg.image_h * cfg.geo_scale);
  return f;
}

// Jittered copy of gt with IoU against gt inside [lo, hi].
geom::Box jitter_box(const geom::Box& gt, const SynthConfig& cfg, Rng& rng,
                     const std::string& image_id) {
  for (int tries = 0; tries < 500; ++tries) {
    double dx = rng.uniform(-0.35, 0.35) * gt.width();
    double dy = rng.uniform(-0.35, 0.35) * gt.height();
    double sw = rng.uniform(0.75, 1.3);
    double sh = rng.uniform(0.75, 1.3);
    geom::Box b = box_from_center(gt.center_x() + dx, gt.center_y() + dy, gt.width() * sw,
                                  gt.height() * sh);
    if (!inside(b, cfg.image_w, cfg.image_h)) continue;
    double v = geom::iou(gt, b);
    if (v >= cfg.jitter_iou_lo && v <= cfg.jitter_iou_hi) return b;
  }
  throw std::runtime_error("synthetic generation: infeasible geometry (no jitter with target IoU), image " +
                           image_id);
}

struct Plan {
  std::vector<geom::Box> true_boxes;           // one per phrase
  std::vector<int> concepts;                   // one per phrase, 1-based
  std::vector<corpus::RelationTriple> chain;   // r = predicate index + 1 (temporary)
  std::vector<geom::Box> distractor_boxes;     // parallel to distractor_of
  std::vector<int> distractor_of;              // phrase index each distractor shadows
};

// Plants N true boxes with clear pairwise separation, derives the
// chain relations from the actual geometry, and mirrors distractors
// across the preceding phrase's box so the planted relation flips sign
// while distance and size stay identical. Which phrases carry a
// distractor is decided by the caller BEFORE the retry loop: if the
// coins were re-flipped per attempt, layouts whose mirrors happen to be
// infeasible (a single mirror lands inside the image only ~1/4 of the
// time) would be retried until the coins came up empty, silently
// deflating the realized distractor rate far below rho. The budget must
// still be generous: at rho = 1 with N phrases an attempt succeeds at
// roughly 4^-(N-1).
Plan plan_layout(const SynthConfig& cfg, int N, const std::vector<int>& concepts,
                 const std::vector<char>& wants_distractor, Rng& rng,
                 const std::string& image_id) {
  double W = cfg.image_w, H = cfg.image_h;
  double margin = 0.08 * std::min(W, H);
  for (int attempt = 0; attempt < 2000; ++attempt) {
    Plan plan;
    plan.concepts = concepts;
    bool ok = true;
    for (int i = 0; i < N && ok; ++i) {
      bool placed = false;
      for (int tries = 0; tries < 200 && !placed; ++tries) {
        geom::Box b = random_box(rng, W, H);
        bool clear = true;
        for (const geom::Box& prev : plan.true_boxes)
          if (geom::iou(b, prev) >= 0.25) clear = false;
        if (clear && i > 0) {
          // The chain predicate must be unambiguous: dominant axis
          // displacement beats the other axis by a margin.
          const geom::Box& prev = plan.true_boxes[size_t(i) - 1];
          double dx = std::abs(b.center_x() - prev.center_x());
          double dy = std::abs(b.center_y() - prev.center_y());
          if (std::abs(dx - dy) < margin) clear = false;
        }
        if (clear) {
          plan.true_boxes.push_back(b);
          placed = true;
        }
      }
      ok = placed;
    }
    if (!ok) continue;

    for (int i = 0; i + 1 < N; ++i)
      plan.chain.push_back({i, i + 1, predicate_of(plan.true_boxes[size_t(i)],
                                                   plan.true_boxes[size_t(i) + 1]) + 1});

    for (int i = 1; i < N && ok; ++i) {
      if (!wants_distractor[size_t(i)]) continue;
      const geom::Box& self = plan.true_boxes[size_t(i)];
      const geom::Box& ref = plan.true_boxes[size_t(i) - 1];
      geom::Box mirror = box_from_center(2.0 * ref.center_x() - self.center_x(),
                                         2.0 * ref.center_y() - self.center_y(), self.width(),
                                         self.height());
      if (!inside(mirror, W, H)) {
        ok = false;
        break;
      }
      for (const geom::Box& tb : plan.true_boxes)
        if (geom::iou(mirror, tb) >= 0.3) ok = false;
      if (ok) {
        plan.distractor_boxes.push_back(mirror);
        plan.distractor_of.push_back(i);
      }
    }
    if (ok) return plan;
  }
  throw std::runtime_error("synthetic generation: infeasible geometry (layout retries exhausted), image " +
                           image_id);
}

corpus::GroundingInstance generate_instance(const SynthConfig& cfg,
                                            const std::vector<std::vector<double>>& prototypes,
                                            Rng& rng, const std::string& image_id) {
  int C = cfg.num_concepts;
  int N = rng.uniform_int(cfg.n_min, cfg.n_max);

  std::vector<int> pool;
  pool.resize(size_t(C));
  for (int c = 0; c < C; ++c) pool[size_t(c)] = c + 1;
  for (int i = C - 1; i > 0; --i) std::swap(pool[size_t(i)], pool[rng.uniform_index(size_t(i) + 1)]);
  std::vector<int> concepts(pool.begin(), pool.begin() + N);

  // Distractor coins are flipped once, before layout retries, so the
  // realized rate tracks rho (see plan_layout). The first phrase is
  // exempt: its relation word follows its span in the caption, where a
  // causal encoder cannot use it.
  std::vector<char> wants_distractor(size_t(N), 0);
  for (int i = 1; i < N; ++i) wants_distractor[size_t(i)] = rng.uniform() < cfg.rho;

  Plan plan = plan_layout(cfg, N, concepts, wants_distractor, rng, image_id);

  // Proposal slots: (box, concept, underlying object box).
  struct Slot {
    geom::Box box;
    int concept_id;
    geom::Box object;
  };
  std::vector<Slot> slots;
  for (int i = 0; i < N; ++i) {
    const geom::Box& gt = plan.true_boxes[size_t(i)];
    if (cfg.jitter) {
      for (int k = 0; k < cfg.true_copies; ++k) {
        geom::Box jb = jitter_box(gt, cfg, rng, image_id);
        slots.push_back({jb, concepts[size_t(i)], gt});
      }
    } else {
      slots.push_back({gt, concepts[size_t(i)], gt});
    }
  }
  for (size_t k = 0; k < plan.distractor_boxes.size(); ++k) {
    int i = plan.distractor_of[k];
    slots.push_back({plan.distractor_boxes[k], concepts[size_t(i)], plan.distractor_boxes[k]});
  }
  if (int(slots.size()) > cfg.M)
    throw std::runtime_error("synthetic generation: infeasible geometry (" +
                             std::to_string(slots.size()) + " planted proposals exceed M=" +
                             std::to_string(cfg.M) + "), image " + image_id);

  std::vector<int> others;
  for (int c = 1; c <= C; ++c)
    if (std::find(concepts.begin(), concepts.end(), c) == concepts.end()) others.push_back(c);
  if (others.empty() && int(slots.size()) < cfg.M)
    throw std::runtime_error("synthetic generation: need at least one concept outside the caption "
                             "for background proposals, image " + image_id);
  while (int(slots.size()) < cfg.M) {
    geom::Box b = random_box(rng, cfg.image_w, cfg.image_h);
    slots.push_back({b, others[rng.uniform_index(others.size())], b});
  }
  for (size_t i = slots.size() - 1; i > 0; --i) std::swap(slots[i], slots[rng.uniform_index(i + 1)]);

  corpus::GroundingInstance inst;
  inst.image.image_id = image_id;
  inst.image.width = cfg.image_w;
  inst.image.height = cfg.image_h;
  for (const Slot& s : slots) {
    corpus::Proposal p;
    p.box = s.box;
    p.category = s.concept_id;
    p.feature = make_feature(prototypes[size_t(s.concept_id) - 1], s.box, s.object, cfg, rng);
    inst.image.proposals.push_back(std::move(p));
  }

  // Caption: "<mod> <head>" per phrase, joined by the predicate word of
  // the chain relation between the two phrases ("red ball left_of blue
  // cube"). The predicate precedes the later span, so the causal
  // encoder folds it into that phrase's representation — the only
  // channel through which a mirrored distractor is resolvable.
  for (int i = 0; i < N; ++i) {
    if (i > 0)
      inst.caption.tokens.push_back(
          relation_word(cfg.num_concepts, plan.chain[size_t(i) - 1].r - 1));
    int b = int(inst.caption.tokens.size());
    inst.caption.tokens.push_back(modifier_word(concepts[size_t(i)], int(rng.uniform_index(2))));
    inst.caption.tokens.push_back(head_word(concepts[size_t(i)]));
    inst.caption.phrases.push_back({b, b + 2, concepts[size_t(i)]});
  }
  inst.caption.relations = plan.chain;
  inst.set_gt_for_eval(plan.true_boxes);
  return inst;
}

void check_config(const SynthConfig& cfg) {
  auto bad = [](const std::string& why) {
    throw std::runtime_error("synthetic generation: " + why);
  };
  if (cfg.d < 8) bad("feature dimension must be at least 8 (content + geometry blocks)");
  if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) bad("invalid phrase count range");
  if (cfg.num_concepts < cfg.n_max + 1)
    bad("need more concepts than phrases per caption (plus one for background)");
  if (cfg.image_w <= 0.0 || cfg.image_h <= 0.0) bad("non-positive image size");
  if (cfg.M < 1) bad("M must be positive");
  if (cfg.rho < 0.0 || cfg.rho > 1.0) bad("rho must lie in [0,1]");
  if (cfg.jitter && !(cfg.jitter_iou_lo > 0.0 && cfg.jitter_iou_lo < cfg.jitter_iou_hi &&
                      cfg.jitter_iou_hi < 1.0))
    bad("jitter IoU range must satisfy 0 < lo < hi < 1");
  if (cfg.true_copies < 1) bad("true_copies must be positive");
  if (cfg.content_degrade < 0.0 || cfg.content_degrade > 1.0)
    bad("content_degrade must lie in [0,1]");
  if (cfg.min_freq < 1) bad("min_freq must be >= 1");
}

}  // namespace

int head_word(int concept_id) { return 3 * (concept_id - 1); }
int modifier_word(int concept_id, int which) { return 3 * (concept_id - 1) + 1 + which; }
int relation_word(int num_concepts, int predicate) { return 3 * num_concepts + predicate; }
int word_universe(int num_concepts) { return 3 * num_concepts + 4; }

SynthResult generate_synthetic(const SynthConfig& cfg, uint64_t seed) {
  check_config(cfg);

  SynthResult out;
  out.vocab_size = word_universe(cfg.num_concepts);

  Rng proto_rng(mix_hash(seed, 0, 0));
  int d_app = cfg.d - 8;
  for (int c = 0; c < cfg.num_concepts; ++c) {
    std::vector<double> p;
    p.resize(size_t(d_app));
    double norm2 = 0.0;
    for (double& v : p) {
      v = proto_rng.normal(0.0, 1.0);
      norm2 += v * v;
    }
    if (d_app > 0) {
      double inv = 1.0 / std::sqrt(std::max(norm2, 1e-12));
      for (double& v : p) v *= inv;
    }
    out.prototypes.push_back(std::move(p));
  }

  struct Split {
    corpus::Corpus* corpus;
    int count;
    uint64_t tag;
    const char* name;
  };
  Split splits[3] = {{&out.train, cfg.num_train, 1, "train"},
                     {&out.val, cfg.num_val, 2, "val"},
                     {&out.test, cfg.num_test, 3, "test"}};
  for (const Split& sp : splits) {
    for (int i = 0; i < sp.count; ++i) {
      Rng rng(mix_hash(seed, sp.tag, uint64_t(i)));
      char idbuf[32];
      std::snprintf(idbuf, sizeof idbuf, "%s_%05d", sp.name, i);
      sp.corpus->push_back(generate_instance(cfg, out.prototypes, rng, idbuf));
    }
  }

  // Relabel the temporary predicate indices through the frequency-built
  // vocabulary, dropping triples whose predicate fell under the
  // threshold (mirrors how rare parses would be discarded).
  std::vector<std::string> strings;
  for (const Split& sp : splits)
    for (const corpus::GroundingInstance& inst : *sp.corpus)
      for (const corpus::RelationTriple& t : inst.caption.relations)
        strings.push_back(kPredicates[t.r - 1]);
  out.relation_vocab = corpus::build_relation_vocabulary(strings, cfg.min_freq);
  for (const Split& sp : splits) {
    for (corpus::GroundingInstance& inst : *sp.corpus) {
      std::vector<corpus::RelationTriple> kept;
      for (const corpus::RelationTriple& t : inst.caption.relations) {
        auto it = out.relation_vocab.label_of.find(kPredicates[t.r - 1]);
        if (it != out.relation_vocab.label_of.end()) kept.push_back({t.i, t.j, it->second});
      }
      inst.caption.relations = std::move(kept);
    }
  }
  return out;
}

}  // namespace wsg::synthetic
