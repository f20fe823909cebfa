#pragma once

#include <map>
#include <string>
#include <vector>

#include "wsg/geometry.hpp"

namespace wsg::corpus {

// One precomputed object proposal: box, detector category, feature vector.
struct Proposal {
  geom::Box box;
  int category = 0;            // 1-based detector category id
  std::vector<double> feature; // dimension d, shared across the corpus
};

struct ImageRecord {
  std::string image_id;
  double width = 0.0, height = 0.0;
  std::vector<Proposal> proposals;

  geom::Box bounds() const { return {0.0, 0.0, width, height}; }
};

// Half-open token range [begin, end) plus the phrase's concept id.
// The concept id keys the shared category/concept embedding table;
// synthetic data uses the planted latent concept, real parsed data
// would use the head noun's vocabulary id.
struct PhraseSpan {
  int begin = 0, end = 0;
  int concept_id = 0; // 1-based; 0 is reserved
};

// Directed relation between phrase i and phrase j with label r in
// [1..C_r]. Label 0 ("no relation") never appears in a corpus file.
struct RelationTriple {
  int i = 0, j = 0, r = 0;
};

struct CaptionRecord {
  std::vector<int> tokens; // word ids, length T
  std::vector<PhraseSpan> phrases;
  std::vector<RelationTriple> relations;
};

// A (image, caption) pair. Ground-truth phrase boxes, when present,
// live behind an evaluation-only accessor: the model and losses take
// ImageRecord/CaptionRecord and so cannot reach gt even by accident.
class GroundingInstance {
 public:
  ImageRecord image;
  CaptionRecord caption;

  bool has_gt() const { return has_gt_; }
  const std::vector<geom::Box>& gt_for_eval() const { return gt_boxes_; }
  void set_gt_for_eval(std::vector<geom::Box> boxes) {
    gt_boxes_ = std::move(boxes);
    has_gt_ = true;
  }
  void clear_gt() {
    gt_boxes_.clear();
    has_gt_ = false;
  }

 private:
  std::vector<geom::Box> gt_boxes_; // one per phrase when has_gt_
  bool has_gt_ = false;
};

using Corpus = std::vector<GroundingInstance>;

// Relation-label vocabulary with ids contiguous in [1..C_r]; id 0 is
// reserved for "no relation" and never assigned.
struct RelationVocabulary {
  std::map<std::string, int> label_of; // string -> id
  std::vector<std::string> names;      // names[id-1]
  std::vector<int> freqs;              // freqs[id-1]
  int min_freq = 0;

  int size() const { return int(names.size()); }
};

// Line-delimited corpus file, one JSON record per line with keys in
// fixed (alphabetical) order:
//   {"gt_boxes":[[x1,y1,x2,y2],...],   // optional
//    "height":H, "image_id":"...",
//    "phrases":[[begin,end,concept],...],
//    "proposals":[[x1,y1,x2,y2,cat,f0,...,f{d-1}],...],
//    "relations":[[i,j,r],...], "tokens":[...], "width":W}
// Serialization is canonical: load followed by save is byte-identical.
Corpus load_corpus(const std::string& path);
void save_corpus(const std::string& path, const Corpus& corpus);

// Strict frequency filter: keeps exactly the strings with frequency
// strictly greater than min_freq; ids by descending frequency, ties
// broken lexicographically.
RelationVocabulary build_relation_vocabulary(const std::vector<std::string>& relation_strings,
                                             int min_freq);

// "string<TAB>id<TAB>frequency" lines, one per label, in id order.
void save_relation_vocabulary(const std::string& path, const RelationVocabulary& vocab);
RelationVocabulary load_relation_vocabulary(const std::string& path);

// Largest relation label referenced by any caption; 0 when none.
int max_relation_label(const Corpus& corpus);

// Largest proposal category / phrase concept id in the corpus; the
// shared embedding table needs max_concept_id+1 rows.
int max_concept_id(const Corpus& corpus);

// Largest token id; vocabulary size must exceed it.
int max_token_id(const Corpus& corpus);

}  // namespace wsg::corpus
