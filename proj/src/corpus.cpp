#include "wsg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wsg::corpus {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ": " + what + ", line " + std::to_string(line));
}

double as_number(const json& j, const std::string& path, int line, const char* field) {
  if (!j.is_number()) fail(path, line, std::string("non-numeric value in '") + field + "'");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path, int line, const char* field) {
  if (!j.is_number_integer()) fail(path, line, std::string("non-integer value in '") + field + "'");
  return j.get<int>();
}

const json& require(const json& rec, const char* field, const std::string& path, int line) {
  auto it = rec.find(field);
  if (it == rec.end()) fail(path, line, std::string("missing field '") + field + "'");
  return *it;
}

GroundingInstance parse_record(const json& rec, const std::string& path, int line,
                               int& corpus_m, int& corpus_d, std::string& first_image_id) {
  if (!rec.is_object()) fail(path, line, "record is not an object");
  GroundingInstance inst;
  ImageRecord& img = inst.image;
  CaptionRecord& cap = inst.caption;

  const json& jid = require(rec, "image_id", path, line);
  if (!jid.is_string()) fail(path, line, "non-string 'image_id'");
  img.image_id = jid.get<std::string>();
  img.width = as_number(require(rec, "width", path, line), path, line, "width");
  img.height = as_number(require(rec, "height", path, line), path, line, "height");
  if (img.width <= 0.0 || img.height <= 0.0) fail(path, line, "non-positive image size");

  const json& jprops = require(rec, "proposals", path, line);
  if (!jprops.is_array() || jprops.empty()) fail(path, line, "'proposals' must be a non-empty array");
  for (const json& jp : jprops) {
    if (!jp.is_array() || jp.size() < 6)
      fail(path, line, "proposal entry needs [x1,y1,x2,y2,cat,features...]");
    Proposal p;
    p.box = {as_number(jp[0], path, line, "proposals"), as_number(jp[1], path, line, "proposals"),
             as_number(jp[2], path, line, "proposals"), as_number(jp[3], path, line, "proposals")};
    p.category = as_int(jp[4], path, line, "proposals");
    if (p.category < 1) fail(path, line, "proposal category id out of range");
    if (!p.box.positive_size()) fail(path, line, "degenerate proposal box");
    if (p.box.x1 < 0.0 || p.box.y1 < 0.0 || p.box.x2 > img.width || p.box.y2 > img.height)
      fail(path, line, "proposal box outside image bounds");
    p.feature.reserve(jp.size() - 5);
    for (size_t k = 5; k < jp.size(); ++k)
      p.feature.push_back(as_number(jp[k], path, line, "proposals"));
    int d = int(p.feature.size());
    if (corpus_d < 0) {
      corpus_d = d;
      first_image_id = img.image_id;
    } else if (d != corpus_d) {
      fail(path, line,
           "feature dimension mismatch (" + std::to_string(d) + " vs " + std::to_string(corpus_d) +
               " established by image_id " + first_image_id + "), image_id " + img.image_id);
    }
    img.proposals.push_back(std::move(p));
  }
  int m = int(img.proposals.size());
  if (corpus_m < 0) {
    corpus_m = m;
  } else if (m != corpus_m) {
    fail(path, line,
         "proposal count mismatch (" + std::to_string(m) + " vs " + std::to_string(corpus_m) +
             "), image_id " + img.image_id);
  }

  const json& jtok = require(rec, "tokens", path, line);
  if (!jtok.is_array() || jtok.empty()) fail(path, line, "'tokens' must be a non-empty array");
  for (const json& jt : jtok) {
    int t = as_int(jt, path, line, "tokens");
    if (t < 0) fail(path, line, "negative token id");
    cap.tokens.push_back(t);
  }
  int T = int(cap.tokens.size());

  const json& jphr = require(rec, "phrases", path, line);
  if (!jphr.is_array() || jphr.empty()) fail(path, line, "'phrases' must be a non-empty array");
  for (const json& js : jphr) {
    if (!js.is_array() || js.size() != 3) fail(path, line, "phrase entry needs [begin,end,concept]");
    PhraseSpan s;
    s.begin = as_int(js[0], path, line, "phrases");
    s.end = as_int(js[1], path, line, "phrases");
    s.concept_id = as_int(js[2], path, line, "phrases");
    if (s.end < s.begin) fail(path, line, "span end before start");
    if (s.end == s.begin) fail(path, line, "empty phrase span");
    if (s.begin < 0 || s.end > T) fail(path, line, "phrase span outside token range");
    if (s.concept_id < 1) fail(path, line, "phrase concept id out of range");
    cap.phrases.push_back(s);
  }
  int N = int(cap.phrases.size());

  const json& jrel = require(rec, "relations", path, line);
  if (!jrel.is_array()) fail(path, line, "'relations' must be an array");
  for (const json& jr : jrel) {
    if (!jr.is_array() || jr.size() != 3) fail(path, line, "relation entry needs [i,j,label]");
    RelationTriple t;
    t.i = as_int(jr[0], path, line, "relations");
    t.j = as_int(jr[1], path, line, "relations");
    t.r = as_int(jr[2], path, line, "relations");
    if (t.i < 0 || t.i >= N || t.j < 0 || t.j >= N) fail(path, line, "relation endpoint not a phrase index");
    if (t.i == t.j) fail(path, line, "relation endpoints identical");
    if (t.r < 1) fail(path, line, "relation label out of range");
    cap.relations.push_back(t);
  }

  if (auto it = rec.find("gt_boxes"); it != rec.end()) {
    const json& jgt = *it;
    if (!jgt.is_array()) fail(path, line, "'gt_boxes' must be an array");
    if (int(jgt.size()) != N) fail(path, line, "gt box count does not match phrase count");
    std::vector<geom::Box> gt;
    for (const json& jb : jgt) {
      if (!jb.is_array() || jb.size() != 4) fail(path, line, "gt box entry needs [x1,y1,x2,y2]");
      geom::Box b{as_number(jb[0], path, line, "gt_boxes"), as_number(jb[1], path, line, "gt_boxes"),
                  as_number(jb[2], path, line, "gt_boxes"), as_number(jb[3], path, line, "gt_boxes")};
      if (!b.valid()) fail(path, line, "invalid gt box");
      gt.push_back(b);
    }
    inst.set_gt_for_eval(std::move(gt));
  }
  return inst;
}

}  // namespace

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open corpus file");
  Corpus corpus;
  std::string text;
  int line = 0;
  int corpus_m = -1, corpus_d = -1;
  std::string first_image_id;
  while (std::getline(in, text)) {
    ++line;
    json rec = json::parse(text, nullptr, false);
    if (rec.is_discarded()) fail(path, line, "malformed record");
    corpus.push_back(parse_record(rec, path, line, corpus_m, corpus_d, first_image_id));
  }
  if (corpus.empty()) throw std::runtime_error(path + ": corpus file is empty");
  return corpus;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  for (const GroundingInstance& inst : corpus) {
    // json objects keep keys sorted, which is exactly the canonical
    // (alphabetical) field order the format promises.
    json rec;
    if (inst.has_gt()) {
      json gt = json::array();
      for (const geom::Box& b : inst.gt_for_eval()) gt.push_back({b.x1, b.y1, b.x2, b.y2});
      rec["gt_boxes"] = std::move(gt);
    }
    rec["height"] = inst.image.height;
    rec["image_id"] = inst.image.image_id;
    json phrases = json::array();
    for (const PhraseSpan& s : inst.caption.phrases) phrases.push_back({s.begin, s.end, s.concept_id});
    rec["phrases"] = std::move(phrases);
    json props = json::array();
    for (const Proposal& p : inst.image.proposals) {
      json row = {p.box.x1, p.box.y1, p.box.x2, p.box.y2, p.category};
      for (double f : p.feature) row.push_back(f);
      props.push_back(std::move(row));
    }
    rec["proposals"] = std::move(props);
    json rels = json::array();
    for (const RelationTriple& t : inst.caption.relations) rels.push_back({t.i, t.j, t.r});
    rec["relations"] = std::move(rels);
    rec["tokens"] = inst.caption.tokens;
    rec["width"] = inst.image.width;
    out << rec.dump() << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

RelationVocabulary build_relation_vocabulary(const std::vector<std::string>& relation_strings,
                                             int min_freq) {
  if (min_freq < 1) throw std::invalid_argument("build_relation_vocabulary: min_freq must be >= 1");
  std::map<std::string, int> counts;
  for (const std::string& s : relation_strings) ++counts[s];

  std::vector<std::pair<std::string, int>> kept;
  for (const auto& [s, n] : counts)
    if (n > min_freq) kept.emplace_back(s, n);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  RelationVocabulary vocab;
  vocab.min_freq = min_freq;
  for (const auto& [s, n] : kept) {
    vocab.names.push_back(s);
    vocab.freqs.push_back(n);
    vocab.label_of[s] = int(vocab.names.size()); // ids contiguous from 1
  }
  return vocab;
}

void save_relation_vocabulary(const std::string& path, const RelationVocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  for (int id = 1; id <= vocab.size(); ++id)
    out << vocab.names[id - 1] << '\t' << id << '\t' << vocab.freqs[id - 1] << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

RelationVocabulary load_relation_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open vocabulary file");
  RelationVocabulary vocab;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream ss(text);
    std::string name;
    int id = 0, freq = 0;
    if (!std::getline(ss, name, '\t') || !(ss >> id >> freq))
      throw std::runtime_error(path + ": malformed vocabulary line " + std::to_string(line));
    if (id != line)
      throw std::runtime_error(path + ": vocabulary ids must be contiguous from 1, line " +
                               std::to_string(line));
    vocab.names.push_back(name);
    vocab.freqs.push_back(freq);
    vocab.label_of[name] = id;
  }
  return vocab;
}

int max_relation_label(const Corpus& corpus) {
  int mx = 0;
  for (const GroundingInstance& inst : corpus)
    for (const RelationTriple& t : inst.caption.relations) mx = std::max(mx, t.r);
  return mx;
}

int max_concept_id(const Corpus& corpus) {
  int mx = 0;
  for (const GroundingInstance& inst : corpus) {
    for (const Proposal& p : inst.image.proposals) mx = std::max(mx, p.category);
    for (const PhraseSpan& s : inst.caption.phrases) mx = std::max(mx, s.concept_id);
  }
  return mx;
}

int max_token_id(const Corpus& corpus) {
  int mx = 0;
  for (const GroundingInstance& inst : corpus)
    for (int t : inst.caption.tokens) mx = std::max(mx, t);
  return mx;
}

}  // namespace wsg::corpus
