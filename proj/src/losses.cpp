#include "wsg/losses.hpp"

#include <cassert>
#include <cstdio>

namespace wsg::losses {

using ad::Graph;
using ad::Mat;
using ad::NodeId;

RegressionTargets build_regression_targets(const std::vector<geom::Box>& boxes,
                                           const std::vector<double>& scores, double tau) {
  assert(boxes.size() == scores.size() && !boxes.empty());
  int n = int(boxes.size());
  RegressionTargets out;
  out.targets = Mat(n, 4);
  out.mask = Mat(n, 4);
  out.best = 0;
  for (int i = 1; i < n; ++i)
    if (scores[size_t(i)] > scores[size_t(out.best)]) out.best = i;
  const geom::Box& pseudo = boxes[size_t(out.best)];
  for (int i = 0; i < n; ++i) {
    // Strict inequality; IoU > 0 already implies both boxes have
    // positive area, so the offset encoding below is well defined.
    if (geom::iou(boxes[size_t(i)], pseudo) <= tau) continue;
    geom::Offset off = geom::encode_offset(boxes[size_t(i)], pseudo);
    out.targets.at(i, 0) = off.tx;
    out.targets.at(i, 1) = off.ty;
    out.targets.at(i, 2) = off.tw;
    out.targets.at(i, 3) = off.th;
    for (int c = 0; c < 4; ++c) out.mask.at(i, c) = 1.0;
  }
  return out;
}

NodeId decode_nll(Graph& g, model::Model& m, NodeId cond, const std::vector<int>& tokens) {
  assert(!tokens.empty());
  NodeId h = cond;
  std::vector<NodeId> logit_rows;
  logit_rows.reserve(tokens.size());
  int prev = m.bos_row();
  for (int tok : tokens) {
    NodeId x = g.gather_rows(g.param(*m.word_emb), {prev});
    h = model::gru_step(g, m.dec, x, h);
    logit_rows.push_back(
        g.add_rowvec(g.matmul(h, g.param(*m.dec_Wout)), g.param(*m.dec_bout)));
    assert(tok >= 0 && tok < m.cfg.vocab_size);
    prev = tok; // teacher forcing on the gold token
  }
  NodeId logp = g.log_softmax_rows(g.concat_rows(logit_rows));
  return g.pick_negmean(logp, tokens);
}

NodeId reconstruction_loss(Graph& g, model::Model& m, const model::InstanceForward& f,
                           const corpus::CaptionRecord& caption) {
  NodeId total = g.scalar(0.0);
  for (int i = 0; i < f.N; ++i) {
    const corpus::PhraseSpan& span = caption.phrases[size_t(i)];
    std::vector<int> tokens(caption.tokens.begin() + span.begin,
                            caption.tokens.begin() + span.end);
    total = g.add(total, decode_nll(g, m, g.gather_rows(f.zc, {i}), tokens));
    total = g.add(total, decode_nll(g, m, g.gather_rows(f.zf, {i}), tokens));
  }
  return total;
}

NodeId relation_logits(Graph& g, model::Model& m, NodeId zf,
                       const std::vector<corpus::RelationTriple>& relations) {
  std::vector<int> lhs, rhs;
  lhs.reserve(relations.size());
  rhs.reserve(relations.size());
  for (const corpus::RelationTriple& t : relations) {
    lhs.push_back(t.i);
    rhs.push_back(t.j); // ordered pair: direction matters
  }
  NodeId pairs = g.concat_cols({g.gather_rows(zf, std::move(lhs)), g.gather_rows(zf, std::move(rhs))});
  return model::mlp2(g, m.rel, pairs);
}

namespace {

// Bidirectional hardest-negative hinge over one level's batch
// embeddings. S[a][b] = cos(image_a, sentence_b); positives on the
// diagonal. Negative picks are recorded into / replayed from `dec`.
NodeId ranking_level(Graph& g, const std::vector<NodeId>& image_vecs,
                     const std::vector<NodeId>& sentence_vecs, double margin,
                     BatchDecisions* dec) {
  int B = int(image_vecs.size());
  NodeId XI = g.l2_normalize_rows(g.concat_rows(image_vecs));
  NodeId XD = g.l2_normalize_rows(g.concat_rows(sentence_vecs));
  NodeId S = g.matmul(XI, g.transpose(XD));
  const Mat& sv = g.value(S);

  auto pick = [&](auto&& argmax) -> int {
    if (dec && dec->frozen) {
      assert(dec->cursor < dec->rank_picks.size());
      return dec->rank_picks[dec->cursor++];
    }
    int chosen = argmax();
    if (dec) dec->rank_picks.push_back(chosen);
    return chosen;
  };

  NodeId total = g.scalar(0.0);
  // Hardest negative image for each sentence b.
  for (int b = 0; b < B; ++b) {
    int a = pick([&] {
      int best = b == 0 ? 1 : 0;
      for (int cand = 0; cand < B; ++cand)
        if (cand != b && sv.at(cand, b) > sv.at(best, b)) best = cand;
      return best;
    });
    NodeId pos = g.gather_elems(S, {{b, b}}, 1, 1);
    NodeId neg = g.gather_elems(S, {{a, b}}, 1, 1);
    total = g.add(total, g.relu(g.affine(g.sub(neg, pos), 1.0, margin)));
  }
  // Hardest negative sentence for each image a.
  for (int a = 0; a < B; ++a) {
    int b = pick([&] {
      int best = a == 0 ? 1 : 0;
      for (int cand = 0; cand < B; ++cand)
        if (cand != a && sv.at(a, cand) > sv.at(a, best)) best = cand;
      return best;
    });
    NodeId pos = g.gather_elems(S, {{a, a}}, 1, 1);
    NodeId neg = g.gather_elems(S, {{a, b}}, 1, 1);
    total = g.add(total, g.relu(g.affine(g.sub(neg, pos), 1.0, margin)));
  }
  return total;
}

}  // namespace

LossNodes batch_loss(Graph& g, model::Model& m, const std::vector<TrainExample>& batch,
                     bool reg_active, BatchDecisions* dec) {
  const RunConfig& cfg = m.cfg;
  int B = int(batch.size());
  assert(B >= 1);
  bool record = dec && !dec->frozen;
  if (record) {
    dec->instances.assign(size_t(B), {});
    dec->rank_picks.clear();
  }
  if (dec && dec->frozen) {
    assert(int(dec->instances.size()) == B);
    dec->cursor = 0;
  }

  std::vector<model::InstanceForward> fwd;
  fwd.reserve(size_t(B));
  for (int b = 0; b < B; ++b) {
    const std::vector<std::vector<int>>* replay =
        dec && dec->frozen ? &dec->instances[size_t(b)].topk : nullptr;
    fwd.push_back(model::run_forward(g, m, *batch[size_t(b)].image, *batch[size_t(b)].caption,
                                     replay));
    if (record) dec->instances[size_t(b)].topk = fwd.back().topk;
  }
  double inv_b = 1.0 / double(B);

  LossNodes nodes;
  nodes.l_rec = g.scalar(0.0);
  if (cfg.use_rec) {
    NodeId sum = g.scalar(0.0);
    for (int b = 0; b < B; ++b)
      sum = g.add(sum, reconstruction_loss(g, m, fwd[size_t(b)], *batch[size_t(b)].caption));
    nodes.l_rec = g.affine(sum, inv_b, 0.0);
  }

  nodes.l_reg = g.scalar(0.0);
  if (cfg.use_regression && reg_active) {
    NodeId sum = g.scalar(0.0);
    for (int b = 0; b < B; ++b) {
      const model::InstanceForward& f = fwd[size_t(b)];
      InstanceDecisions scratch; // stands in when no decision recording is requested
      InstanceDecisions& idec = dec ? dec->instances[size_t(b)] : scratch;
      const corpus::ImageRecord& image = *batch[size_t(b)].image;
      int M = int(image.proposals.size());
      const Mat& coarse_scores = g.value(f.coarse_fused);
      const Mat& fused_scores = g.value(f.fused);
      for (int i = 0; i < f.N; ++i) {
        RegressionTargets ct, ft;
        if (dec && dec->frozen) {
          ct = idec.coarse[size_t(i)];
          ft = idec.fine[size_t(i)];
        } else {
          std::vector<geom::Box> boxes;
          std::vector<double> scores;
          boxes.reserve(size_t(M));
          scores.reserve(size_t(M));
          for (int mm = 0; mm < M; ++mm) {
            boxes.push_back(image.proposals[size_t(mm)].box);
            scores.push_back(coarse_scores.at(i, mm));
          }
          ct = build_regression_targets(boxes, scores, cfg.tau);
          std::vector<double> fscores;
          fscores.reserve(size_t(f.K));
          for (int k = 0; k < f.K; ++k) fscores.push_back(fused_scores.at(i, k));
          ft = build_regression_targets(f.refined[size_t(i)], fscores, cfg.tau);
          if (record) {
            idec.coarse.push_back(ct);
            idec.fine.push_back(ft);
          }
        }
        std::vector<int> crows, frows;
        crows.resize(size_t(M));
        frows.resize(size_t(f.K));
        for (int mm = 0; mm < M; ++mm) crows[size_t(mm)] = i * M + mm;
        for (int k = 0; k < f.K; ++k) frows[size_t(k)] = i * f.K + k;
        sum = g.add(sum, g.smooth_l1(g.gather_rows(f.coarse_delta, std::move(crows)), ct.targets,
                                     ct.mask));
        sum = g.add(sum, g.smooth_l1(g.gather_rows(f.fine_delta, std::move(frows)), ft.targets,
                                     ft.mask));
      }
    }
    nodes.l_reg = g.affine(sum, inv_b, 0.0);
  }

  nodes.l_rel = g.scalar(0.0);
  if (cfg.use_graph_and_relation && cfg.C_r > 0) {
    int total_pairs = 0;
    for (int b = 0; b < B; ++b) total_pairs += int(batch[size_t(b)].caption->relations.size());
    if (total_pairs > 0) {
      NodeId sum = g.scalar(0.0);
      for (int b = 0; b < B; ++b) {
        const std::vector<corpus::RelationTriple>& rels = batch[size_t(b)].caption->relations;
        if (rels.empty()) continue;
        NodeId logp = g.log_softmax_rows(relation_logits(g, m, fwd[size_t(b)].zf, rels));
        std::vector<int> picks;
        picks.reserve(rels.size());
        for (const corpus::RelationTriple& t : rels) {
          assert(t.r >= 1 && t.r <= cfg.C_r);
          picks.push_back(t.r - 1);
        }
        // pick_negmean averages within the instance; reweight so the
        // batch term is the mean over all labeled pairs.
        double w = double(rels.size()) / double(total_pairs);
        sum = g.add(sum, g.affine(g.pick_negmean(logp, picks), w, 0.0));
      }
      nodes.l_rel = sum;
    }
  }

  nodes.l_rank = g.scalar(0.0);
  if (cfg.use_rank) {
    if (B < 2) {
      static bool warned = false;
      if (!warned) {
        std::fprintf(stderr, "warning: ranking loss needs batch size >= 2; emitting 0\n");
        warned = true;
      }
    } else {
      std::vector<NodeId> xc, xf, xd;
      xc.reserve(size_t(B));
      xf.reserve(size_t(B));
      xd.reserve(size_t(B));
      for (int b = 0; b < B; ++b) {
        xc.push_back(g.mean_rows(fwd[size_t(b)].zc));
        xf.push_back(g.mean_rows(fwd[size_t(b)].zf));
        xd.push_back(g.mean_rows(fwd[size_t(b)].H));
      }
      nodes.l_rank = g.add(ranking_level(g, xc, xd, cfg.delta, dec),
                           ranking_level(g, xf, xd, cfg.delta, dec));
    }
  }

  nodes.total = nodes.l_rec;
  if (cfg.use_regression && reg_active)
    nodes.total = g.add(nodes.total, g.affine(nodes.l_reg, cfg.lambda1, 0.0));
  if (cfg.use_graph_and_relation)
    nodes.total = g.add(nodes.total, g.affine(nodes.l_rel, cfg.lambda2, 0.0));
  if (cfg.use_rank) nodes.total = g.add(nodes.total, g.affine(nodes.l_rank, cfg.lambda3, 0.0));
  return nodes;
}

LossBundle values_of(const Graph& g, const LossNodes& nodes) {
  LossBundle b;
  b.l_rec = g.value(nodes.l_rec).a[0];
  b.l_reg = g.value(nodes.l_reg).a[0];
  b.l_rel = g.value(nodes.l_rel).a[0];
  b.l_rank = g.value(nodes.l_rank).a[0];
  b.total = g.value(nodes.total).a[0];
  return b;
}

}  // namespace wsg::losses
