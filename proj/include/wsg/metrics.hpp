#pragma once

#include <map>
#include <string>
#include <vector>

#include "wsg/corpus.hpp"
#include "wsg/geometry.hpp"
#include "wsg/model.hpp"

namespace wsg::metrics {

// Aggregate grounding quality over a corpus.
struct MetricsReport {
  std::map<double, double> acc_at;   // IoU threshold -> fraction of phrases hit
  double pointit = 0.0;              // fraction whose predicted center lies in gt
  double mean_iou = 0.0;
  std::map<int, double> rel_top_k;   // k -> top-k relation classification accuracy
  int counts = 0;                    // phrases evaluated
};

// One grounded phrase, keyed by (image_id, phrase index within the caption).
struct PhrasePrediction {
  std::string image_id;
  int phrase = 0;
  geom::Box box;
};

inline const std::vector<double>& default_thresholds() {
  static const std::vector<double> t{0.5, 0.6, 0.7, 0.8};
  return t;
}

// Scores predictions against the gold boxes. Every (image_id, phrase)
// pair in `gold` must be covered by exactly one prediction; missing or
// duplicate entries raise an error naming the offenders. Pure function
// of its inputs. rel_top_k is left empty (see relation_accuracy).
MetricsReport evaluate(const std::vector<PhrasePrediction>& predictions,
                       const corpus::Corpus& gold,
                       const std::vector<double>& thresholds = default_thresholds());

// Top-k accuracy of the pairwise relation classifier over every labeled
// pair in the corpus. Returns an empty map (with a warning on stderr)
// when no instance carries relation labels.
std::map<int, double> relation_accuracy(model::Model& m, const corpus::Corpus& data,
                                        const std::vector<int>& ks);

// Runs inference over a corpus and packages the results for evaluate().
std::vector<PhrasePrediction> predict_corpus(model::Model& m, const corpus::Corpus& data);

// Convenience: predict + evaluate, the number the training loop logs.
double accuracy_at(model::Model& m, const corpus::Corpus& data, double threshold);

// Report as a JSON object (stable key order) for the eval subcommand.
std::string report_to_json(const MetricsReport& report);

}  // namespace wsg::metrics
