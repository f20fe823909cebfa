#include "wsg/coarse_matcher.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

namespace wsg::coarse {

using ad::Graph;
using ad::Mat;
using ad::NodeId;

PairScores score_pairs(Graph& g, const model::Mlp& cls, const model::Mlp& reg, NodeId xq_rows,
                       NodeId xo_rows, int N, int cols) {
  NodeId pair = g.concat_cols({xq_rows, xo_rows, g.mul(xq_rows, xo_rows)});
  NodeId raw = g.reshape(g.sigmoid(model::mlp2(g, cls, pair)), N, cols);
  NodeId delta = model::mlp2(g, reg, pair);
  return {raw, delta};
}

FusedScores fuse_and_attend(Graph& g, NodeId raw, NodeId semantic) {
  NodeId fused = g.mul(raw, semantic);
  return {fused, g.softmax_rows(fused)};
}

std::vector<std::vector<int>> select_topk(const Mat& fused, int K) {
  assert(K >= 1 && K <= fused.cols);
  std::vector<std::vector<int>> out(size_t(fused.rows));
  std::vector<int> order(size_t(fused.cols));
  for (int i = 0; i < fused.rows; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (fused.at(i, a) != fused.at(i, b)) return fused.at(i, a) > fused.at(i, b);
      return a < b;
    });
    out[size_t(i)].assign(order.begin(), order.begin() + K);
  }
  return out;
}

std::vector<std::vector<geom::Box>> refine_boxes(const std::vector<geom::Box>& proposals,
                                                 const Mat& delta,
                                                 const std::vector<std::vector<int>>& topk,
                                                 const geom::Box& bounds, bool apply) {
  int M = int(proposals.size());
  std::vector<std::vector<geom::Box>> out(topk.size());
  for (size_t i = 0; i < topk.size(); ++i) {
    for (int idx : topk[i]) {
      if (!apply) {
        out[i].push_back(proposals[size_t(idx)]);
        continue;
      }
      int row = int(i) * M + idx;
      geom::Offset off{delta.at(row, 0), delta.at(row, 1), delta.at(row, 2), delta.at(row, 3)};
      out[i].push_back(geom::apply_offset(proposals[size_t(idx)], off, bounds));
    }
  }
  return out;
}

NodeId renormalized_attention(Graph& g, NodeId fused, const std::vector<std::vector<int>>& topk) {
  int N = int(topk.size());
  int K = int(topk.empty() ? 0 : topk[0].size());
  std::vector<std::pair<int, int>> rc;
  rc.reserve(size_t(N) * size_t(K));
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) rc.emplace_back(i, topk[size_t(i)][size_t(k)]);
  // softmax of the restriction == restriction of the softmax, renormalized
  return g.softmax_rows(g.gather_elems(fused, std::move(rc), N, K));
}

}  // namespace wsg::coarse
