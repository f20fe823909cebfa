#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wsg/corpus.hpp"
#include "wsg/losses.hpp"
#include "wsg/model.hpp"

namespace wsg::trainer {

// Learning rate in effect at (1-based) iteration t: lr0 scaled by 0.1
// for every milestone fraction already passed. A milestone at fraction
// f counts as passed once t > round(f * total_iters), so with
// total_iters = 10 and a milestone at 0.4 the rate drops starting at
// iteration 5.
double learning_rate_at(const RunConfig& cfg, long long t);

// Warmup gate for the regression term: active once
// t > round(reg_warmup_fraction * total_iters). A fraction of 1.0
// therefore disables the term for the whole run.
bool regression_active_at(const RunConfig& cfg, long long t);

// Stateless deterministic batch assembly: slot s of iteration t draws
// corpus index hash(seed, t, s) mod corpus_size. No RNG state survives
// between iterations, so resumed runs sample identically.
std::vector<size_t> batch_indices(const RunConfig& cfg, long long t, size_t corpus_size);

// One SGD-with-momentum update from the gradients currently in the
// store: g <- clip(g) + weight_decay * theta; v <- momentum * v + g;
// theta <- theta - lr * v. Clipping rescales the whole gradient to
// global norm grad_clip when it exceeds it; grad_clip <= 0 disables.
// Returns the pre-clip global gradient norm.
double sgd_step(ad::ParameterStore& params, double lr, double weight_decay, double momentum,
                double grad_clip);

// Grounding accuracy at IoU 0.5 over a held-out corpus. Builds fresh
// inference graphs only; never touches parameter values or optimizer
// state.
double validation_accuracy(model::Model& m, const corpus::Corpus& val_set);

struct TrainSink {
  std::string log_path; // metric lines appended here when non-empty
  bool echo = false;    // mirror each line to stderr
};

struct TrainOutcome {
  long long final_iteration = 0;
  double final_val_acc = std::numeric_limits<double>::quiet_NaN();
  losses::LossBundle last; // loss breakdown of the final iteration
};

// Runs iterations start_iter+1 .. stop_iter of the schedule defined by
// m.cfg (stop_iter is normally cfg.total_iters; a smaller value stops
// early so the caller can checkpoint and resume). Metric lines
// "iter\tl_rec\tl_reg\tl_rel\tl_rank\ttotal\tval_acc" are appended at
// the logging cadence; val_acc is nan except at validation points.
// Aborts with iteration number and component breakdown if any loss
// term turns non-finite.
TrainOutcome run_training(model::Model& m, const corpus::Corpus& train_set,
                          const corpus::Corpus& val_set, long long start_iter,
                          long long stop_iter, const TrainSink& sink = {});

}  // namespace wsg::trainer
