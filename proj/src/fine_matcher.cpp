#include "wsg/fine_matcher.hpp"

#include <cassert>

#include "wsg/coarse_matcher.hpp"

namespace wsg::fine {

using ad::Graph;
using ad::Mat;
using ad::NodeId;

FineOut fine_score(Graph& g, model::Model& m, NodeId Xq, NodeId xprime, NodeId sem_sel,
                   NodeId coarse_fused_sel, int N, int K) {
  std::vector<int> rep(size_t(N) * size_t(K));
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) rep[size_t(i * K + k)] = i;
  NodeId xq_rows = g.gather_rows(Xq, std::move(rep));
  coarse::PairScores ps = coarse::score_pairs(g, m.fine_cls, m.fine_reg, xq_rows, xprime, N, K);

  FineOut out;
  out.raw = ps.raw;
  out.delta = ps.delta;
  out.sf = g.mul(ps.raw, sem_sel);
  out.att = g.softmax_rows(out.sf);
  out.fused = g.mul(coarse_fused_sel, out.sf);
  return out;
}

std::vector<Prediction> infer(model::Model& m, const corpus::ImageRecord& image,
                              const corpus::CaptionRecord& caption) {
  Graph g;
  model::InstanceForward f = model::run_forward(g, m, image, caption);
  const Mat& fused = g.value(f.fused);
  const Mat& delta = g.value(f.fine_delta);

  std::vector<Prediction> out;
  out.reserve(size_t(f.N));
  for (int i = 0; i < f.N; ++i) {
    int best = 0;
    for (int k = 1; k < f.K; ++k)
      if (fused.at(i, k) > fused.at(i, best)) best = k;
    geom::Box box = f.refined[size_t(i)][size_t(best)];
    if (m.cfg.use_regression) {
      int row = i * f.K + best;
      geom::Offset off{delta.at(row, 0), delta.at(row, 1), delta.at(row, 2), delta.at(row, 3)};
      box = geom::apply_offset(box, off, image.bounds());
    }
    out.push_back({i, box, fused.at(i, best)});
  }
  return out;
}

}  // namespace wsg::fine
