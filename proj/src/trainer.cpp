#include "wsg/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "wsg/metrics.hpp"
#include "wsg/numfmt.hpp"
#include "wsg/rng.hpp"

namespace wsg::trainer {

double learning_rate_at(const RunConfig& cfg, long long t) {
  double lr = cfg.lr0;
  for (double f : cfg.lr_milestones)
    if (t > std::llround(f * double(cfg.total_iters))) lr *= 0.1;
  return lr;
}

bool regression_active_at(const RunConfig& cfg, long long t) {
  return t > std::llround(cfg.reg_warmup_fraction * double(cfg.total_iters));
}

std::vector<size_t> batch_indices(const RunConfig& cfg, long long t, size_t corpus_size) {
  if (corpus_size == 0) throw std::runtime_error("batch_indices: empty corpus");
  std::vector<size_t> idx(size_t(cfg.batch_size));
  for (int s = 0; s < cfg.batch_size; ++s)
    idx[size_t(s)] = size_t(mix_hash(cfg.seed, uint64_t(t), uint64_t(s)) % corpus_size);
  return idx;
}

double sgd_step(ad::ParameterStore& params, double lr, double weight_decay, double momentum,
                double grad_clip) {
  double sq = 0.0;
  for (const auto& p : params.items())
    for (double gv : p->grad.a) sq += gv * gv;
  double norm = std::sqrt(sq);
  double scale = (grad_clip > 0.0 && norm > grad_clip) ? grad_clip / norm : 1.0;
  for (auto& p : params.items()) {
    for (size_t i = 0; i < p->value.a.size(); ++i) {
      double g = p->grad.a[i] * scale + weight_decay * p->value.a[i];
      p->velocity.a[i] = momentum * p->velocity.a[i] + g;
      p->value.a[i] -= lr * p->velocity.a[i];
    }
  }
  return norm;
}

double validation_accuracy(model::Model& m, const corpus::Corpus& val_set) {
  return metrics::accuracy_at(m, val_set, 0.5);
}

TrainOutcome run_training(model::Model& m, const corpus::Corpus& train_set,
                          const corpus::Corpus& val_set, long long start_iter,
                          long long stop_iter, const TrainSink& sink) {
  const RunConfig& cfg = m.cfg;
  if (train_set.empty()) throw std::runtime_error("run_training: empty training corpus");
  if (stop_iter > cfg.total_iters)
    throw std::runtime_error("run_training: stop iteration exceeds total_iters");

  std::ofstream log;
  if (!sink.log_path.empty()) {
    log.open(sink.log_path, std::ios::app);
    if (!log) throw std::runtime_error(sink.log_path + ": cannot open metric log");
  }

  TrainOutcome out;
  out.final_iteration = start_iter;
  for (long long t = start_iter + 1; t <= stop_iter; ++t) {
    std::vector<size_t> idx = batch_indices(cfg, t, train_set.size());
    std::vector<losses::TrainExample> batch;
    batch.reserve(idx.size());
    for (size_t i : idx) batch.push_back({&train_set[i].image, &train_set[i].caption});

    ad::Graph g;
    losses::LossNodes nodes = losses::batch_loss(g, m, batch, regression_active_at(cfg, t), nullptr);
    losses::LossBundle bundle = losses::values_of(g, nodes);
    if (!std::isfinite(bundle.total) || !std::isfinite(bundle.l_rec) ||
        !std::isfinite(bundle.l_reg) || !std::isfinite(bundle.l_rel) ||
        !std::isfinite(bundle.l_rank)) {
      throw std::runtime_error(
          "training aborted at iteration " + std::to_string(t) + ": non-finite loss (l_rec=" +
          format_double(bundle.l_rec) + ", l_reg=" + format_double(bundle.l_reg) +
          ", l_rel=" + format_double(bundle.l_rel) + ", l_rank=" + format_double(bundle.l_rank) +
          ", total=" + format_double(bundle.total) + ")");
    }

    m.params.zero_grads();
    g.backward(nodes.total);
    sgd_step(m.params, learning_rate_at(cfg, t), cfg.weight_decay, cfg.momentum, cfg.grad_clip);

    out.final_iteration = t;
    out.last = bundle;

    bool val_point = !val_set.empty() && (t % cfg.val_every == 0 || t == stop_iter);
    bool log_point = val_point || t % cfg.log_every == 0 || t == stop_iter;
    double val_acc = std::numeric_limits<double>::quiet_NaN();
    if (val_point) {
      val_acc = validation_accuracy(m, val_set);
      out.final_val_acc = val_acc;
    }
    if (log_point) {
      std::string line = std::to_string(t) + "\t" + format_double(bundle.l_rec) + "\t" +
                         format_double(bundle.l_reg) + "\t" + format_double(bundle.l_rel) + "\t" +
                         format_double(bundle.l_rank) + "\t" + format_double(bundle.total) + "\t" +
                         format_double(val_acc);
      if (log.is_open()) log << line << "\n" << std::flush;
      if (sink.echo) std::fprintf(stderr, "%s\n", line.c_str());
    }
  }
  return out;
}

}  // namespace wsg::trainer
