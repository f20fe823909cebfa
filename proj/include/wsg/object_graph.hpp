#pragma once

#include <vector>

#include "wsg/model.hpp"

namespace wsg::graphnet {

// Attention-weighted pooling of each phrase's selected proposal
// features: z_i = sum_k att[i,k] * feats[i*K + k]. Also reused to
// aggregate fine-level reconstruction vectors (same arithmetic).
ad::NodeId init_nodes(ad::Graph& g, ad::NodeId att, ad::NodeId feats);

// One message-passing round over the undirected phrase graph built
// from the relation triples: z'_i = z_i + sum_{j in N(i)} w_ij F_M(z_j)
// with w_ij = softmax_j over N(i) of <F_M(z_i), F_M(z_j)>. Isolated
// nodes pass through unchanged.
struct MessageOut {
  ad::NodeId zprime;
  std::vector<ad::NodeId> omega;           // per non-isolated node: 1 x |N(i)|
  std::vector<std::vector<int>> neighbors; // per node, ascending
};
MessageOut message_pass(ad::Graph& g, const model::Mlp& FM, ad::NodeId z, int N,
                        const std::vector<corpus::RelationTriple>& relations);

// Context redistribution: x'_{i,k} = feats[i*K+k] + att[i,k] * z'_i.
ad::NodeId redistribute(ad::Graph& g, ad::NodeId feats, ad::NodeId att, ad::NodeId zprime, int N,
                        int K);

}  // namespace wsg::graphnet
