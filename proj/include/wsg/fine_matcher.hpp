#pragma once

#include <vector>

#include "wsg/model.hpp"

namespace wsg::fine {

// Stage-2 scoring of the K context-enriched candidates per phrase.
// sem_sel and coarse_fused_sel are the stage-1 semantic and fused
// scores gathered to the selection (both N x K).
struct FineOut {
  ad::NodeId raw;   // N x K sigmoid scores
  ad::NodeId sf;    // N x K, raw (*) semantic
  ad::NodeId att;   // N x K softmax of sf
  ad::NodeId delta; // (N*K) x 4
  ad::NodeId fused; // N x K final scores, coarse_fused_sel (*) sf
};
FineOut fine_score(ad::Graph& g, model::Model& m, ad::NodeId Xq, ad::NodeId xprime,
                   ad::NodeId sem_sel, ad::NodeId coarse_fused_sel, int N, int K);

struct Prediction {
  int phrase = 0;
  geom::Box box;
  double score = 0.0;
};

// End-to-end inference for one instance: full forward pass, then per
// phrase the argmax of the fused score, its stage-1-refined box with
// the stage-2 offset applied (unless regression is disabled), clipped
// to the image. Reads only the image and caption records.
std::vector<Prediction> infer(model::Model& m, const corpus::ImageRecord& image,
                              const corpus::CaptionRecord& caption);

}  // namespace wsg::fine
