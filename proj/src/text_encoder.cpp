#include "wsg/text_encoder.hpp"

#include <cassert>

namespace wsg::text {

using ad::Graph;
using ad::NodeId;

NodeId embed_tokens(Graph& g, model::Model& m, const std::vector<int>& tokens) {
  std::vector<int> rows;
  rows.reserve(tokens.size());
  for (int t : tokens) rows.push_back(t >= 0 && t < m.cfg.vocab_size ? t : m.unk_row());
  return g.gather_rows(g.param(*m.word_emb), std::move(rows));
}

NodeId encode_sentence(Graph& g, model::Model& m, const std::vector<int>& tokens) {
  assert(!tokens.empty());
  NodeId emb = embed_tokens(g, m, tokens);
  NodeId h = g.constant(ad::Mat(1, m.cfg.d));
  std::vector<NodeId> states;
  states.reserve(tokens.size());
  for (int t = 0; t < int(tokens.size()); ++t) {
    h = model::gru_step(g, m.enc, g.gather_rows(emb, {t}), h);
    states.push_back(h);
  }
  return g.concat_rows(states);
}

NodeId pool_phrase(Graph& g, NodeId H, const corpus::PhraseSpan& span) {
  std::vector<int> rows;
  for (int t = span.begin; t < span.end; ++t) rows.push_back(t);
  return g.mean_rows(g.gather_rows(H, std::move(rows)));
}

NodeId pool_phrases(Graph& g, NodeId H, const std::vector<corpus::PhraseSpan>& spans) {
  std::vector<NodeId> rows;
  rows.reserve(spans.size());
  for (const corpus::PhraseSpan& s : spans) rows.push_back(pool_phrase(g, H, s));
  return g.concat_rows(rows);
}

NodeId semantic_table(Graph& g, model::Model& m, const std::vector<int>& concepts,
                      const std::vector<int>& categories) {
  NodeId table = g.l2_normalize_rows(g.param(*m.cat_emb));
  for ([[maybe_unused]] int c : concepts) assert(c >= 0 && c <= m.cfg.num_categories);
  for ([[maybe_unused]] int c : categories) assert(c >= 0 && c <= m.cfg.num_categories);
  NodeId q = g.gather_rows(table, std::vector<int>(concepts.begin(), concepts.end()));
  NodeId o = g.gather_rows(table, std::vector<int>(categories.begin(), categories.end()));
  NodeId cos = g.matmul(q, g.transpose(o));
  return g.affine(cos, 0.5, 0.5); // cosine in [-1,1] -> similarity in [0,1]
}

double semantic_similarity(model::Model& m, int concept_id, int category_id) {
  ad::Graph g;
  NodeId t = semantic_table(g, m, {concept_id}, {category_id});
  return g.value(t).a[0];
}

}  // namespace wsg::text
