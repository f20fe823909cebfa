#include "wsg/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "wsg/fine_matcher.hpp"
#include "wsg/losses.hpp"
#include "wsg/numfmt.hpp"

namespace wsg::metrics {

MetricsReport evaluate(const std::vector<PhrasePrediction>& predictions,
                       const corpus::Corpus& gold, const std::vector<double>& thresholds) {
  using Key = std::pair<std::string, int>;
  std::map<Key, geom::Box> by_key;
  std::vector<std::string> duplicates;
  for (const PhrasePrediction& p : predictions) {
    Key k{p.image_id, p.phrase};
    if (!by_key.emplace(k, p.box).second)
      duplicates.push_back(p.image_id + "#" + std::to_string(p.phrase));
  }
  if (!duplicates.empty()) {
    std::string msg = "evaluate: duplicate predictions for:";
    for (const std::string& d : duplicates) msg += " " + d;
    throw std::runtime_error(msg);
  }

  std::vector<std::string> missing;
  std::vector<double> ious;
  int pointit_hits = 0;
  for (const corpus::GroundingInstance& inst : gold) {
    if (!inst.has_gt())
      throw std::runtime_error("evaluate: instance " + inst.image.image_id +
                               " carries no gold boxes");
    const std::vector<geom::Box>& gt = inst.gt_for_eval();
    for (int i = 0; i < int(inst.caption.phrases.size()); ++i) {
      auto it = by_key.find(Key{inst.image.image_id, i});
      if (it == by_key.end()) {
        missing.push_back(inst.image.image_id + "#" + std::to_string(i));
        continue;
      }
      const geom::Box& pred = it->second;
      ious.push_back(geom::iou(pred, gt[size_t(i)]));
      if (geom::center_in(pred, gt[size_t(i)])) ++pointit_hits;
      by_key.erase(it);
    }
  }
  if (!missing.empty()) {
    std::string msg = "evaluate: missing predictions for:";
    for (const std::string& m : missing) msg += " " + m;
    throw std::runtime_error(msg);
  }
  if (!by_key.empty()) {
    std::string msg = "evaluate: predictions for unknown phrases:";
    for (const auto& [k, box] : by_key) msg += " " + k.first + "#" + std::to_string(k.second);
    throw std::runtime_error(msg);
  }

  MetricsReport report;
  report.counts = int(ious.size());
  double n = std::max<double>(1.0, double(ious.size()));
  for (double t : thresholds) {
    int hits = 0;
    for (double v : ious)
      if (v >= t) ++hits;
    report.acc_at[t] = double(hits) / n;
  }
  report.pointit = double(pointit_hits) / n;
  report.mean_iou = std::accumulate(ious.begin(), ious.end(), 0.0) / n;
  return report;
}

std::map<int, double> relation_accuracy(model::Model& m, const corpus::Corpus& data,
                                        const std::vector<int>& ks) {
  std::map<int, int> hits;
  int total = 0;
  for (const corpus::GroundingInstance& inst : data) {
    const auto& rels = inst.caption.relations;
    if (rels.empty()) continue;
    ad::Graph g;
    model::InstanceForward f = model::run_forward(g, m, inst.image, inst.caption);
    const ad::Mat& logits = g.value(losses::relation_logits(g, m, f.zf, rels));
    for (int p = 0; p < int(rels.size()); ++p) {
      int gold = rels[size_t(p)].r - 1;  // labels are 1-based; logits are not
      // Rank of the gold label: strictly better scores count ahead of
      // it, equal scores break toward the lower label index.
      int ahead = 0;
      for (int c = 0; c < logits.cols; ++c) {
        if (c == gold) continue;
        double d = logits.at(p, c) - logits.at(p, gold);
        if (d > 0 || (d == 0 && c < gold)) ++ahead;
      }
      for (int k : ks)
        if (ahead < k) ++hits[k];
      ++total;
    }
  }
  std::map<int, double> out;
  if (total == 0) {
    std::fprintf(stderr, "warning: relation accuracy requested but the corpus has no labeled pairs\n");
    return out;
  }
  for (int k : ks) out[k] = double(hits[k]) / double(total);
  return out;
}

std::vector<PhrasePrediction> predict_corpus(model::Model& m, const corpus::Corpus& data) {
  std::vector<PhrasePrediction> out;
  for (const corpus::GroundingInstance& inst : data) {
    for (const fine::Prediction& p : fine::infer(m, inst.image, inst.caption))
      out.push_back({inst.image.image_id, p.phrase, p.box});
  }
  return out;
}

double accuracy_at(model::Model& m, const corpus::Corpus& data, double threshold) {
  MetricsReport r = evaluate(predict_corpus(m, data), data, {threshold});
  return r.acc_at.at(threshold);
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::json j;
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [t, v] : report.acc_at) acc[format_double(t)] = v;
  j["acc_at"] = acc;
  j["counts"] = report.counts;
  j["mean_iou"] = report.mean_iou;
  j["pointit"] = report.pointit;
  nlohmann::json rel = nlohmann::json::object();
  for (const auto& [k, v] : report.rel_top_k) rel[std::to_string(k)] = v;
  j["rel_top_k"] = rel;
  return j.dump(2);
}

}  // namespace wsg::metrics
