#pragma once

#include <vector>

#include "wsg/model.hpp"

namespace wsg::text {

// Word embeddings for a token sequence; ids outside [0, V) map to the
// reserved UNK row. Result is T x d_w.
ad::NodeId embed_tokens(ad::Graph& g, model::Model& m, const std::vector<int>& tokens);

// Recurrent encoding; row t is the hidden state after consuming
// token t. Result is T x d.
ad::NodeId encode_sentence(ad::Graph& g, model::Model& m, const std::vector<int>& tokens);

// Mean of the hidden-state rows covered by the span.
ad::NodeId pool_phrase(ad::Graph& g, ad::NodeId H, const corpus::PhraseSpan& span);
ad::NodeId pool_phrases(ad::Graph& g, ad::NodeId H, const std::vector<corpus::PhraseSpan>& spans);

// Table of (cos + 1)/2 similarities between the (L2-normalized)
// embedding rows of the phrase concepts and the proposal categories.
// Differentiable in the shared embedding table. Result is N x M.
ad::NodeId semantic_table(ad::Graph& g, model::Model& m, const std::vector<int>& concepts,
                          const std::vector<int>& categories);

// Scalar convenience wrapper (fresh throwaway graph) for tests/tools.
double semantic_similarity(model::Model& m, int concept_id, int category_id);

}  // namespace wsg::text
