#pragma once

#include <vector>

#include "wsg/model.hpp"

namespace wsg::coarse {

// Scorer + regressor over pre-replicated (phrase, proposal) rows:
// xq_rows and xo_rows are both R x d with R = N*cols, phrase-major.
// raw comes back reshaped to N x cols after the sigmoid; delta stays
// R x 4. Both stages share this shape (independent parameters).
struct PairScores {
  ad::NodeId raw;   // N x cols, in (0,1)
  ad::NodeId delta; // R x 4
};
PairScores score_pairs(ad::Graph& g, const model::Mlp& cls, const model::Mlp& reg,
                       ad::NodeId xq_rows, ad::NodeId xo_rows, int N, int cols);

// fused = raw (*) semantic; attention rows = softmax of fused rows.
struct FusedScores {
  ad::NodeId fused;
  ad::NodeId attention;
};
FusedScores fuse_and_attend(ad::Graph& g, ad::NodeId raw, ad::NodeId semantic);

// Per phrase: indices of the K highest fused scores, descending, ties
// broken toward the lower proposal index. Pure value-level ranking —
// selection is a non-differentiable decision.
std::vector<std::vector<int>> select_topk(const ad::Mat& fused, int K);

// Apply each phrase's predicted offsets to its selected boxes and clip
// to the image. With apply=false the originals are copied through
// (regression ablation).
std::vector<std::vector<geom::Box>> refine_boxes(const std::vector<geom::Box>& proposals,
                                                 const ad::Mat& delta,
                                                 const std::vector<std::vector<int>>& topk,
                                                 const geom::Box& bounds, bool apply);

// Coarse attention restricted to the selection and renormalized; equal
// to softmax of the gathered fused scores. Result is N x K.
ad::NodeId renormalized_attention(ad::Graph& g, ad::NodeId fused,
                                  const std::vector<std::vector<int>>& topk);

}  // namespace wsg::coarse
