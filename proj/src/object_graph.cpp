#include "wsg/object_graph.hpp"

#include <algorithm>
#include <cassert>

namespace wsg::graphnet {

using ad::Graph;
using ad::Mat;
using ad::NodeId;

NodeId init_nodes(Graph& g, NodeId att, NodeId feats) {
  const Mat& av = g.value(att);
  int N = av.rows, K = av.cols;
  assert(g.value(feats).rows == N * K);
  std::vector<NodeId> rows;
  rows.reserve(size_t(N));
  for (int i = 0; i < N; ++i) {
    std::vector<std::pair<int, int>> rc;
    std::vector<int> block;
    block.resize(size_t(K));
    for (int k = 0; k < K; ++k) {
      rc.emplace_back(i, k);
      block[size_t(k)] = i * K + k;
    }
    NodeId w = g.gather_elems(att, std::move(rc), 1, K);
    rows.push_back(g.matmul(w, g.gather_rows(feats, std::move(block))));
  }
  return g.concat_rows(rows);
}

MessageOut message_pass(Graph& g, const model::Mlp& FM, NodeId z, int N,
                        const std::vector<corpus::RelationTriple>& relations) {
  MessageOut out;
  out.neighbors.assign(size_t(N), {});
  for (const corpus::RelationTriple& t : relations) {
    // Undirected, deduplicated adjacency; relation direction is the
    // relation classifier's concern, not the message graph's.
    auto& ni = out.neighbors[size_t(t.i)];
    if (std::find(ni.begin(), ni.end(), t.j) == ni.end()) {
      ni.push_back(t.j);
      out.neighbors[size_t(t.j)].push_back(t.i);
    }
  }
  for (auto& n : out.neighbors) std::sort(n.begin(), n.end());

  NodeId messages = model::mlp2(g, FM, z); // F_M(z_j) for every node, N x d
  std::vector<NodeId> rows;
  rows.reserve(size_t(N));
  for (int i = 0; i < N; ++i) {
    NodeId zi = g.gather_rows(z, {i});
    const std::vector<int>& nbr = out.neighbors[size_t(i)];
    if (nbr.empty()) {
      rows.push_back(zi);
      continue;
    }
    NodeId fi = g.gather_rows(messages, {i});                       // 1 x d
    NodeId fj = g.gather_rows(messages, std::vector<int>(nbr.begin(), nbr.end())); // n x d
    NodeId scores = g.matmul(fi, g.transpose(fj));                  // 1 x n inner products
    NodeId w = g.softmax_rows(scores);
    out.omega.push_back(w);
    rows.push_back(g.add(zi, g.matmul(w, fj)));
  }
  out.zprime = g.concat_rows(rows);
  return out;
}

NodeId redistribute(Graph& g, NodeId feats, NodeId att, NodeId zprime, int N, int K) {
  // att reshaped to a (N*K) x 1 column, tiled across d by an outer
  // product with a ones row, then applied elementwise.
  int d = g.value(zprime).cols;
  NodeId att_col = g.reshape(att, N * K, 1);
  NodeId tiled = g.matmul(att_col, g.constant(Mat::full(1, d, 1.0)));
  std::vector<int> rep(size_t(N) * size_t(K));
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) rep[size_t(i * K + k)] = i;
  NodeId z_rep = g.gather_rows(zprime, std::move(rep));
  return g.add(feats, g.mul(tiled, z_rep));
}

}  // namespace wsg::graphnet
