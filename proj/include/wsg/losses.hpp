#pragma once

#include <vector>

#include "wsg/model.hpp"

namespace wsg::losses {

// Self-taught regression targets for one phrase and one stage: the
// most confident proposal (highest score, ties to the lower index) is
// pseudo ground truth; every proposal overlapping it with IoU > tau
// regresses toward it, everything else is masked out of the loss. The
// returned matrices are plain constants — no gradient reaches the
// target side.
struct RegressionTargets {
  ad::Mat targets; // n x 4 offset encodings (zero rows where masked)
  ad::Mat mask;    // n x 4, rows of ones for contributing proposals
  int best = -1;
};
RegressionTargets build_regression_targets(const std::vector<geom::Box>& boxes,
                                           const std::vector<double>& scores, double tau);

// Data-dependent discrete choices made during one batch forward. They
// are recorded on a normal pass and replayed verbatim when `frozen`,
// so a finite-difference probe differentiates exactly the same
// conditional objective the analytic gradient belongs to (selection
// and pseudo-targets are non-differentiable / stop-gradient by
// contract).
struct InstanceDecisions {
  std::vector<std::vector<int>> topk;
  std::vector<RegressionTargets> coarse; // per phrase, over the M proposals
  std::vector<RegressionTargets> fine;   // per phrase, over the K candidates
};
struct BatchDecisions {
  bool frozen = false;
  std::vector<InstanceDecisions> instances;
  std::vector<int> rank_picks; // hardest-negative indices, recording order
  size_t cursor = 0;           // replay position within rank_picks
};

// Training view of an instance: the model side never sees gt boxes.
struct TrainExample {
  const corpus::ImageRecord* image = nullptr;
  const corpus::CaptionRecord* caption = nullptr;
};

struct LossNodes {
  ad::NodeId l_rec, l_reg, l_rel, l_rank, total;
};
struct LossBundle {
  double l_rec = 0.0, l_reg = 0.0, l_rel = 0.0, l_rank = 0.0, total = 0.0;
};

// Teacher-forced decoder: mean negative log-likelihood of the token
// sequence given the 1 x d conditioning vector as initial state.
ad::NodeId decode_nll(ad::Graph& g, model::Model& m, ad::NodeId cond,
                      const std::vector<int>& tokens);

// Sum over phrases of coarse + fine reconstruction NLL for one
// instance (both paths share the decoder parameters).
ad::NodeId reconstruction_loss(ad::Graph& g, model::Model& m, const model::InstanceForward& f,
                               const corpus::CaptionRecord& caption);

// Relation-classifier logits for the labeled ordered pairs: P x C_r.
ad::NodeId relation_logits(ad::Graph& g, model::Model& m, ad::NodeId zf,
                           const std::vector<corpus::RelationTriple>& relations);

// Total loss l_rec + lambda1*l_reg + lambda2*l_rel + lambda3*l_rank on
// a batch under the model's ablation flags; reg_active gates the
// regression term (warmup). Per-instance terms are averaged over the
// batch; the ranking term is inherently batch-level and stays a sum.
LossNodes batch_loss(ad::Graph& g, model::Model& m, const std::vector<TrainExample>& batch,
                     bool reg_active, BatchDecisions* decisions);

LossBundle values_of(const ad::Graph& g, const LossNodes& nodes);

}  // namespace wsg::losses
