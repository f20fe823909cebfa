#include "wsg/model.hpp"

#include <cassert>
#include <cmath>

#include "wsg/coarse_matcher.hpp"
#include "wsg/fine_matcher.hpp"
#include "wsg/object_graph.hpp"
#include "wsg/rng.hpp"
#include "wsg/text_encoder.hpp"

namespace wsg::model {

using ad::Graph;
using ad::Mat;
using ad::NodeId;
using ad::Parameter;

namespace {

void uniform_fan_in(Parameter& p, int fan_in, Rng& rng) {
  double s = 1.0 / std::sqrt(double(fan_in));
  for (double& v : p.value.a) v = rng.uniform(-s, s);
}

// Orthonormal rows via Gram-Schmidt on a random Gaussian matrix;
// keeps recurrent dynamics well-conditioned at the start.
void orthogonal(Parameter& p, Rng& rng) {
  Mat& w = p.value;
  assert(w.rows == w.cols);
  for (int r = 0; r < w.rows; ++r) {
    for (int redraw = 0; redraw < 16; ++redraw) {
      for (int c = 0; c < w.cols; ++c) w.at(r, c) = rng.normal(0.0, 1.0);
      for (int q = 0; q < r; ++q) {
        double dot = 0.0;
        for (int c = 0; c < w.cols; ++c) dot += w.at(r, c) * w.at(q, c);
        for (int c = 0; c < w.cols; ++c) w.at(r, c) -= dot * w.at(q, c);
      }
      double norm2 = 0.0;
      for (int c = 0; c < w.cols; ++c) norm2 += w.at(r, c) * w.at(r, c);
      if (norm2 > 1e-8) {
        double inv = 1.0 / std::sqrt(norm2);
        for (int c = 0; c < w.cols; ++c) w.at(r, c) *= inv;
        break;
      }
    }
  }
}

Gru make_gru(ad::ParameterStore& ps, const std::string& prefix, int in, int hidden, Rng& rng) {
  Gru g;
  auto gate = [&](const char* name, Parameter*& W, Parameter*& U, Parameter*& b) {
    W = &ps.add(prefix + ".W" + name, in, hidden);
    uniform_fan_in(*W, in, rng);
    U = &ps.add(prefix + ".U" + name, hidden, hidden);
    orthogonal(*U, rng);
    b = &ps.add(prefix + ".b" + name, 1, hidden);
  };
  gate("z", g.Wz, g.Uz, g.bz);
  gate("r", g.Wr, g.Ur, g.br);
  gate("h", g.Wh, g.Uh, g.bh);
  return g;
}

Mlp make_mlp(ad::ParameterStore& ps, const std::string& prefix, int in, int hidden, int out,
             Rng& rng) {
  Mlp m;
  m.W1 = &ps.add(prefix + ".W1", in, hidden);
  uniform_fan_in(*m.W1, in, rng);
  m.b1 = &ps.add(prefix + ".b1", 1, hidden);
  m.W2 = &ps.add(prefix + ".W2", hidden, out);
  uniform_fan_in(*m.W2, hidden, rng);
  m.b2 = &ps.add(prefix + ".b2", 1, out);
  return m;
}

}  // namespace

Model init_model(const RunConfig& config, uint64_t seed) {
  validate_config(config);
  Model m;
  m.cfg = config;
  Rng rng(seed);

  int V = config.vocab_size, d = config.d, dw = config.d_w, h = config.mlp_hidden;

  m.word_emb = &m.params.add("word_emb", V + 2, dw);
  uniform_fan_in(*m.word_emb, dw, rng);
  m.enc = make_gru(m.params, "enc", dw, d, rng);
  m.cat_emb = &m.params.add("cat_emb", config.num_categories + 1, config.d_e);
  uniform_fan_in(*m.cat_emb, config.d_e, rng);

  m.coarse_cls = make_mlp(m.params, "coarse.cls", 3 * d, h, 1, rng);
  m.coarse_reg = make_mlp(m.params, "coarse.reg", 3 * d, h, 4, rng);
  m.msg = make_mlp(m.params, "msg", d, h, d, rng);
  m.rel = make_mlp(m.params, "rel", 2 * d, h, std::max(config.C_r, 1), rng);
  m.fine_cls = make_mlp(m.params, "fine.cls", 3 * d, h, 1, rng);
  m.fine_reg = make_mlp(m.params, "fine.reg", 3 * d, h, 4, rng);

  m.dec = make_gru(m.params, "dec", dw, d, rng);
  m.dec_Wout = &m.params.add("dec.Wout", d, V);
  uniform_fan_in(*m.dec_Wout, d, rng);
  m.dec_bout = &m.params.add("dec.bout", 1, V);
  return m;
}

NodeId gru_step(Graph& g, const Gru& p, NodeId x, NodeId h) {
  auto gate = [&](Parameter* W, Parameter* U, Parameter* b) {
    return g.add_rowvec(g.add(g.matmul(x, g.param(*W)), g.matmul(h, g.param(*U))), g.param(*b));
  };
  NodeId z = g.sigmoid(gate(p.Wz, p.Uz, p.bz));
  NodeId r = g.sigmoid(gate(p.Wr, p.Ur, p.br));
  NodeId cand = g.tanh_(g.add_rowvec(
      g.add(g.matmul(x, g.param(*p.Wh)), g.matmul(g.mul(r, h), g.param(*p.Uh))), g.param(*p.bh)));
  // h' = (1 - z) * h + z * cand
  NodeId one_minus_z = g.affine(z, -1.0, 1.0);
  return g.add(g.mul(one_minus_z, h), g.mul(z, cand));
}

NodeId mlp2(Graph& g, const Mlp& p, NodeId rows) {
  NodeId hidden = g.tanh_(g.add_rowvec(g.matmul(rows, g.param(*p.W1)), g.param(*p.b1)));
  return g.add_rowvec(g.matmul(hidden, g.param(*p.W2)), g.param(*p.b2));
}

InstanceForward run_forward(Graph& g, Model& m, const corpus::ImageRecord& image,
                            const corpus::CaptionRecord& caption,
                            const std::vector<std::vector<int>>* replay_topk) {
  const RunConfig& cfg = m.cfg;
  InstanceForward f;
  f.N = int(caption.phrases.size());
  f.T = int(caption.tokens.size());
  int M = int(image.proposals.size());
  int d = cfg.d;
  f.K = cfg.use_topk ? std::min(cfg.K, M) : M;
  assert(f.N > 0 && M > 0);

  // Ingested proposal features as one constant M x d block.
  Mat xo(M, d);
  std::vector<geom::Box> boxes;
  boxes.reserve(size_t(M));
  std::vector<int> categories;
  categories.reserve(size_t(M));
  for (int mm = 0; mm < M; ++mm) {
    const corpus::Proposal& p = image.proposals[size_t(mm)];
    assert(int(p.feature.size()) == d);
    for (int c = 0; c < d; ++c) xo.at(mm, c) = p.feature[size_t(c)];
    boxes.push_back(p.box);
    categories.push_back(p.category);
  }
  NodeId Xo = g.constant(std::move(xo));

  f.H = text::encode_sentence(g, m, caption.tokens);
  f.Xq = text::pool_phrases(g, f.H, caption.phrases);

  if (cfg.use_semantic_fusion) {
    std::vector<int> concepts;
    concepts.reserve(size_t(f.N));
    for (const corpus::PhraseSpan& s : caption.phrases) concepts.push_back(s.concept_id);
    f.coarse_semantic = text::semantic_table(g, m, concepts, categories);
  } else {
    f.coarse_semantic = g.constant(Mat::full(f.N, M, 1.0));
  }

  // Stage 1 over all N*M pairs, phrase-major.
  {
    std::vector<int> qi(size_t(f.N) * size_t(M)), oi(size_t(f.N) * size_t(M));
    for (int i = 0; i < f.N; ++i)
      for (int mm = 0; mm < M; ++mm) {
        qi[size_t(i * M + mm)] = i;
        oi[size_t(i * M + mm)] = mm;
      }
    coarse::PairScores ps =
        coarse::score_pairs(g, m.coarse_cls, m.coarse_reg, g.gather_rows(f.Xq, std::move(qi)),
                            g.gather_rows(Xo, std::move(oi)), f.N, M);
    f.coarse_raw = ps.raw;
    f.coarse_delta = ps.delta;
  }
  coarse::FusedScores fs = coarse::fuse_and_attend(g, f.coarse_raw, f.coarse_semantic);
  f.coarse_fused = fs.fused;
  f.coarse_att = fs.attention;

  f.topk = replay_topk ? *replay_topk : coarse::select_topk(g.value(f.coarse_fused), f.K);
  f.refined = coarse::refine_boxes(boxes, g.value(f.coarse_delta), f.topk, image.bounds(),
                                   cfg.use_regression);
  f.renorm_att = coarse::renormalized_attention(g, f.coarse_fused, f.topk);

  std::vector<int> sel_flat;
  sel_flat.reserve(size_t(f.N) * size_t(f.K));
  std::vector<std::pair<int, int>> sel_rc;
  sel_rc.reserve(sel_flat.capacity());
  for (int i = 0; i < f.N; ++i)
    for (int k = 0; k < f.K; ++k) {
      sel_flat.push_back(f.topk[size_t(i)][size_t(k)]);
      sel_rc.emplace_back(i, f.topk[size_t(i)][size_t(k)]);
    }
  f.sel_feats = g.gather_rows(Xo, sel_flat);

  f.z = graphnet::init_nodes(g, f.renorm_att, f.sel_feats);
  if (cfg.use_graph_and_relation) {
    graphnet::MessageOut mo = graphnet::message_pass(g, m.msg, f.z, f.N, caption.relations);
    f.zprime = mo.zprime;
    f.omega = std::move(mo.omega);
    f.neighbors = std::move(mo.neighbors);
    f.xprime = graphnet::redistribute(g, f.sel_feats, f.renorm_att, f.zprime, f.N, f.K);
  } else {
    f.zprime = f.z;
    f.xprime = f.sel_feats;
    f.neighbors.assign(size_t(f.N), {});
  }

  NodeId sem_sel = cfg.use_semantic_fusion ? g.gather_elems(f.coarse_semantic, sel_rc, f.N, f.K)
                                           : g.constant(Mat::full(f.N, f.K, 1.0));
  NodeId coarse_fused_sel = g.gather_elems(f.coarse_fused, std::move(sel_rc), f.N, f.K);
  fine::FineOut fo = fine::fine_score(g, m, f.Xq, f.xprime, sem_sel, coarse_fused_sel, f.N, f.K);
  f.fine_raw = fo.raw;
  f.fine_sf = fo.sf;
  f.fine_att = fo.att;
  f.fine_delta = fo.delta;
  f.fused = fo.fused;

  // Reconstruction conditioners: full-M coarse attention over the raw
  // features; fine attention over the context-enriched selection.
  f.zc = g.matmul(f.coarse_att, Xo);
  f.zf = graphnet::init_nodes(g, f.fine_att, f.xprime);
  return f;
}

}  // namespace wsg::model
