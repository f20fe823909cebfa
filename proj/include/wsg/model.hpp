#pragma once

#include <vector>

#include "wsg/autodiff.hpp"
#include "wsg/config.hpp"
#include "wsg/corpus.hpp"
#include "wsg/geometry.hpp"

namespace wsg::model {

// Two-layer perceptron head: in -> tanh hidden -> linear out.
struct Mlp {
  ad::Parameter *W1 = nullptr, *b1 = nullptr, *W2 = nullptr, *b2 = nullptr;
};

// Gated recurrent cell parameters (update z, reset r, candidate h).
struct Gru {
  ad::Parameter *Wz = nullptr, *Uz = nullptr, *bz = nullptr;
  ad::Parameter *Wr = nullptr, *Ur = nullptr, *br = nullptr;
  ad::Parameter *Wh = nullptr, *Uh = nullptr, *bh = nullptr;
};

// All learnable state. Parameter names are stable and are the
// checkpoint contract. Word table layout: rows [0..V) are words,
// row V is UNK, row V+1 is the decoder start symbol.
struct Model {
  RunConfig cfg;
  ad::ParameterStore params;

  ad::Parameter* word_emb = nullptr; // (V+2) x d_w
  ad::Parameter* cat_emb = nullptr;  // (C+1) x d_e, row 0 reserved
  Gru enc;                           // sentence encoder, hidden size d
  Mlp coarse_cls, coarse_reg;        // stage-1 heads over [x_q; x_o; x_q*x_o]
  Mlp msg;                           // F_M message network, d -> d
  Mlp rel;                           // F_rel relation head, 2d -> C_r
  Mlp fine_cls, fine_reg;            // stage-2 heads (independent params)
  Gru dec;                           // shared reconstruction decoder
  ad::Parameter* dec_Wout = nullptr; // d x V
  ad::Parameter* dec_bout = nullptr; // 1 x V

  int unk_row() const { return cfg.vocab_size; }
  int bos_row() const { return cfg.vocab_size + 1; }
};

// Fresh model with deterministic initialization: uniform fan-in
// scaling for projections and embeddings, orthogonal recurrent
// matrices, zero biases.
Model init_model(const RunConfig& config, uint64_t seed);

// One recurrent step: x is 1 x d_w input, h is 1 x d state.
ad::NodeId gru_step(ad::Graph& g, const Gru& p, ad::NodeId x, ad::NodeId h);

// Head application over a batch of rows.
ad::NodeId mlp2(ad::Graph& g, const Mlp& p, ad::NodeId rows);

// Everything the losses and inference need from one instance's
// forward pass. K below is the effective K (M when denoising is off).
// Score/attention tables are N x K; per-pair tensors are (N*K) x d
// or (N*K) x 4, phrase-major.
struct InstanceForward {
  int N = 0, K = 0, T = 0;

  ad::NodeId H;   // T x d encoder states
  ad::NodeId Xq;  // N x d pooled phrase vectors

  ad::NodeId coarse_raw;      // N x M sigmoid scores
  ad::NodeId coarse_semantic; // N x M semantic similarities (ones when fusion off)
  ad::NodeId coarse_fused;    // N x M
  ad::NodeId coarse_att;      // N x M, rows sum to 1
  ad::NodeId coarse_delta;    // (N*M) x 4

  std::vector<std::vector<int>> topk;       // N x K selected proposal indices
  std::vector<std::vector<geom::Box>> refined; // stage-1 refined boxes per phrase

  ad::NodeId renorm_att; // N x K, coarse attention renormalized over the selection
  ad::NodeId sel_feats;  // (N*K) x d original features of selected proposals

  ad::NodeId z;      // N x d graph node init
  ad::NodeId zprime; // N x d after one message round (z when graph off)
  ad::NodeId xprime; // (N*K) x d context-enriched features (sel_feats when graph off)
  std::vector<ad::NodeId> omega;           // per non-isolated node: 1 x |N(i)|
  std::vector<std::vector<int>> neighbors; // per node, sorted neighbor ids

  ad::NodeId fine_raw;   // N x K sigmoid scores
  ad::NodeId fine_sf;    // N x K s^f (raw * semantic restricted)
  ad::NodeId fine_att;   // N x K, rows sum to 1
  ad::NodeId fine_delta; // (N*K) x 4
  ad::NodeId fused;      // N x K final scores s^c * s^f

  ad::NodeId zc; // N x d reconstruction vector, full-M coarse attention
  ad::NodeId zf; // N x d reconstruction vector, fine attention over K
};

// Full forward: encode -> coarse -> top-K refine -> graph -> fine.
// Touches only the image and caption records, never gt. If
// replay_topk is non-null the recorded selection is reused instead of
// re-ranking (frozen-decision replay for finite-difference checks).
InstanceForward run_forward(ad::Graph& g, Model& m, const corpus::ImageRecord& image,
                            const corpus::CaptionRecord& caption,
                            const std::vector<std::vector<int>>* replay_topk = nullptr);

}  // namespace wsg::model
