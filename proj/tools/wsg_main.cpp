// Command-line surface: corpus generation, training, evaluation,
// inference, ablation tables, and plot emission. Every subcommand
// exits 0 on success and nonzero with a one-line diagnostic otherwise.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsg/ablation.hpp"
#include "wsg/checkpoint.hpp"
#include "wsg/config.hpp"
#include "wsg/corpus.hpp"
#include "wsg/fine_matcher.hpp"
#include "wsg/metrics.hpp"
#include "wsg/model.hpp"
#include "wsg/numfmt.hpp"
#include "wsg/plots.hpp"
#include "wsg/synthetic.hpp"
#include "wsg/trainer.hpp"

namespace fs = std::filesystem;
using namespace wsg;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
  f << content;
  if (!f) throw std::runtime_error(path.string() + ": write failed");
}

corpus::Corpus load_required_corpus(const std::string& path, const char* what) {
  if (path.empty())
    throw std::runtime_error(std::string("no ") + what + " corpus configured");
  return corpus::load_corpus(path);
}

// The loaded data has to fit the tables the model was built with.
void check_corpus_against_config(const corpus::Corpus& data, const RunConfig& cfg,
                                 const char* what) {
  if (corpus::max_token_id(data) >= cfg.vocab_size)
    throw std::runtime_error(std::string(what) + ": token id " +
                             std::to_string(corpus::max_token_id(data)) +
                             " outside vocab_size " + std::to_string(cfg.vocab_size));
  if (corpus::max_concept_id(data) > cfg.num_categories)
    throw std::runtime_error(std::string(what) + ": concept/category id " +
                             std::to_string(corpus::max_concept_id(data)) + " exceeds num_categories " +
                             std::to_string(cfg.num_categories));
  if (corpus::max_relation_label(data) > cfg.C_r)
    throw std::runtime_error(std::string(what) + ": relation label " +
                             std::to_string(corpus::max_relation_label(data)) + " exceeds C_r " +
                             std::to_string(cfg.C_r));
  for (const corpus::GroundingInstance& inst : data)
    if (int(inst.image.proposals.front().feature.size()) != cfg.d)
      throw std::runtime_error(std::string(what) + ": feature dimension " +
                               std::to_string(inst.image.proposals.front().feature.size()) +
                               " does not match d = " + std::to_string(cfg.d));
}

struct GenArgs {
  std::string out_dir;
  std::uint64_t seed = 1;
  synthetic::SynthConfig sc;
};

int run_gen(const GenArgs& a) {
  fs::create_directories(a.out_dir);
  synthetic::SynthResult res = synthetic::generate_synthetic(a.sc, a.seed);
  fs::path out(a.out_dir);
  corpus::save_corpus((out / "train.jsonl").string(), res.train);
  corpus::save_corpus((out / "val.jsonl").string(), res.val);
  corpus::save_corpus((out / "test.jsonl").string(), res.test);
  corpus::save_relation_vocabulary((out / "relations.tsv").string(), res.relation_vocab);

  RunConfig rc;
  rc.M = a.sc.M;
  rc.d = a.sc.d;
  rc.vocab_size = res.vocab_size;
  rc.num_categories = a.sc.num_concepts;
  rc.C_r = res.relation_vocab.size();
  rc.seed = a.seed;
  rc.train_corpus = (out / "train.jsonl").string();
  rc.val_corpus = (out / "val.jsonl").string();
  rc.relation_vocab = (out / "relations.tsv").string();
  save_config((out / "run.config").string(), rc);

  std::printf("wrote %zu train / %zu val / %zu test instances, %d relation labels -> %s\n",
              res.train.size(), res.val.size(), res.test.size(), res.relation_vocab.size(),
              a.out_dir.c_str());
  return 0;
}

struct TrainArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string resume;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  long long stop = 0;  // 0: train to total_iters
};

int run_train(const TrainArgs& a) {
  RunConfig file_cfg = load_config(a.config_path);
  RunConfig cfg;
  model::Model m;
  long long start = 0;

  if (!a.resume.empty()) {
    ckpt::LoadedCheckpoint lc = ckpt::load_checkpoint(a.resume);
    cfg = parse_config(lc.config_text);
    std::string warn = ckpt::snapshot_override_warning(cfg, file_cfg);
    if (!warn.empty()) std::fprintf(stderr, "%s\n", warn.c_str());
    for (const std::string& s : a.sets) apply_override(cfg, s);
    if (a.seed_given) cfg.seed = a.seed;
    validate_config(cfg);
    // Overrides may tune schedule or cadence but cannot reshape the
    // network the checkpoint was trained with.
    model::Model ref = model::init_model(cfg, cfg.seed);
    const auto& got = lc.model.params.items();
    const auto& want = ref.params.items();
    if (got.size() != want.size())
      throw std::runtime_error("resume: override changes the parameter set; refusing");
    for (size_t i = 0; i < got.size(); ++i)
      if (got[i]->name != want[i]->name || got[i]->value.rows != want[i]->value.rows ||
          got[i]->value.cols != want[i]->value.cols)
        throw std::runtime_error("resume: override reshapes parameter " + want[i]->name +
                                 "; refusing");
    m = std::move(lc.model);
    m.cfg = cfg;
    start = (long long)lc.iteration;
  } else {
    cfg = file_cfg;
    for (const std::string& s : a.sets) apply_override(cfg, s);
    if (a.seed_given) cfg.seed = a.seed;
    validate_config(cfg);
    m = model::init_model(cfg, cfg.seed);
  }

  corpus::Corpus train = load_required_corpus(cfg.train_corpus, "train");
  check_corpus_against_config(train, cfg, "train corpus");
  corpus::Corpus val;
  if (!cfg.val_corpus.empty()) {
    val = corpus::load_corpus(cfg.val_corpus);
    check_corpus_against_config(val, cfg, "val corpus");
  } else {
    std::fprintf(stderr, "warning: no validation corpus configured; val_acc stays nan\n");
  }

  fs::create_directories(a.out_dir);
  fs::path out(a.out_dir);
  save_config((out / "config.resolved").string(), cfg);
  trainer::TrainSink sink{(out / "metrics.tsv").string(), true};
  // Stopping early must not warp the schedule (milestones and warmup
  // are fractions of total_iters), so the plan length stays cfg-owned
  // and --stop only truncates the iteration range.
  long long stop = a.stop > 0 ? a.stop : cfg.total_iters;
  trainer::TrainOutcome res = trainer::run_training(m, train, val, start, stop, sink);
  std::string ckpt_path = (out / "final.ckpt").string();
  ckpt::save_checkpoint(ckpt_path, m, std::uint64_t(res.final_iteration));
  std::printf("trained to iteration %lld: total=%s val_acc@0.5=%s -> %s\n",
              res.final_iteration, format_double(res.last.total).c_str(),
              format_double(res.final_val_acc).c_str(), ckpt_path.c_str());
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string corpus_path;
  std::string out_path;
  std::vector<int> rel_ks{1, 2, 3};
};

int run_eval(const EvalArgs& a) {
  ckpt::LoadedCheckpoint lc = ckpt::load_checkpoint(a.checkpoint);
  model::Model m = std::move(lc.model);
  std::string path = a.corpus_path.empty() ? m.cfg.val_corpus : a.corpus_path;
  corpus::Corpus data = load_required_corpus(path, "evaluation");
  check_corpus_against_config(data, m.cfg, "evaluation corpus");

  metrics::MetricsReport report = metrics::evaluate(metrics::predict_corpus(m, data), data);
  report.rel_top_k = metrics::relation_accuracy(m, data, a.rel_ks);
  std::string json = metrics::report_to_json(report);
  std::printf("%s\n", json.c_str());
  if (!a.out_path.empty()) write_text(a.out_path, json + "\n");
  return 0;
}

struct InferArgs {
  std::string checkpoint;
  std::string corpus_path;
  std::string out_path;
};

int run_infer(const InferArgs& a) {
  ckpt::LoadedCheckpoint lc = ckpt::load_checkpoint(a.checkpoint);
  model::Model m = std::move(lc.model);
  corpus::Corpus data = load_required_corpus(a.corpus_path, "inference");
  check_corpus_against_config(data, m.cfg, "inference corpus");

  std::string lines;
  for (const corpus::GroundingInstance& inst : data) {
    for (const fine::Prediction& p : fine::infer(m, inst.image, inst.caption)) {
      nlohmann::json j;
      j["box"] = {p.box.x1, p.box.y1, p.box.x2, p.box.y2};
      j["image_id"] = inst.image.image_id;
      j["phrase"] = p.phrase;
      j["score"] = p.score;
      lines += j.dump() + "\n";
    }
  }
  if (a.out_path.empty())
    std::fputs(lines.c_str(), stdout);
  else
    write_text(a.out_path, lines);
  return 0;
}

struct AblateArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<std::string> variant_names;
  std::vector<std::string> sets;
  double rho = 0.5;
  int gen_train = 500;
  int gen_val = 100;
};

int run_ablate(const AblateArgs& a) {
  RunConfig base = a.config_path.empty() ? RunConfig{} : load_config(a.config_path);
  for (const std::string& s : a.sets) apply_override(base, s);

  std::vector<ablation::Variant> variants = ablation::default_variants();
  if (!a.variant_names.empty()) {
    std::vector<ablation::Variant> picked;
    for (const std::string& name : a.variant_names) {
      bool found = false;
      for (const ablation::Variant& v : variants)
        if (v.name == name) {
          picked.push_back(v);
          found = true;
        }
      if (!found) {
        std::string known;
        for (const ablation::Variant& v : variants) known += " " + v.name;
        throw std::runtime_error("unknown variant '" + name + "'; known:" + known);
      }
    }
    variants = std::move(picked);
  }

  ablation::CorpusProvider provider;
  std::map<std::uint64_t, std::pair<corpus::Corpus, corpus::Corpus>> generated;
  if (!base.train_corpus.empty()) {
    corpus::Corpus train = corpus::load_corpus(base.train_corpus);
    corpus::Corpus val = load_required_corpus(base.val_corpus, "validation");
    check_corpus_against_config(train, base, "train corpus");
    check_corpus_against_config(val, base, "val corpus");
    provider = [train, val](std::uint64_t, corpus::Corpus& t, corpus::Corpus& v) {
      t = train;
      v = val;
    };
  } else {
    synthetic::SynthConfig sc;
    sc.M = base.M;
    sc.d = base.d;
    sc.num_concepts = base.num_categories;
    sc.rho = a.rho;
    sc.num_train = a.gen_train;
    sc.num_val = a.gen_val;
    sc.num_test = 0;
    int relation_labels = -1;
    for (std::uint64_t s : a.seeds) {
      synthetic::SynthResult res = synthetic::generate_synthetic(sc, s);
      if (relation_labels < 0) relation_labels = res.relation_vocab.size();
      if (relation_labels != res.relation_vocab.size())
        throw std::runtime_error("generated corpora disagree on relation vocabulary size");
      base.vocab_size = res.vocab_size;
      generated[s] = {std::move(res.train), std::move(res.val)};
    }
    base.C_r = relation_labels;
    provider = [&generated](std::uint64_t seed, corpus::Corpus& t, corpus::Corpus& v) {
      const auto& pair = generated.at(seed);
      t = pair.first;
      v = pair.second;
    };
  }
  validate_config(base);

  std::vector<ablation::AblationRow> rows =
      ablation::run_ablation(base, variants, a.seeds, provider, true);
  std::string table = ablation::format_table(rows, a.seeds);
  std::printf("%s", table.c_str());
  fs::create_directories(a.out_dir);
  fs::path out(a.out_dir);
  write_text(out / "ablation.txt", table);
  write_text(out / "ablation.csv", ablation::table_to_csv(rows, a.seeds));
  return 0;
}

struct PlotArgs {
  std::string log_path;
  std::string report_path;
  std::string out_dir = ".";
};

int run_plot(const PlotArgs& a) {
  if (a.log_path.empty() && a.report_path.empty())
    throw std::runtime_error("plot: pass --log and/or --report");
  fs::create_directories(a.out_dir);
  fs::path out(a.out_dir);
  if (!a.log_path.empty()) {
    plots::MetricLog log = plots::parse_metric_log(a.log_path);
    write_text(out / "loss_curves.csv", plots::loss_curves_csv(log));
    write_text(out / "loss_curves.svg", plots::loss_curves_svg(log));
    std::printf("wrote %s and %s\n", (out / "loss_curves.csv").c_str(),
                (out / "loss_curves.svg").c_str());
  }
  if (!a.report_path.empty()) {
    std::ifstream f(a.report_path);
    if (!f) throw std::runtime_error(a.report_path + ": cannot open report");
    nlohmann::json j = nlohmann::json::parse(f);
    metrics::MetricsReport report;
    if (!j.contains("acc_at") || !j["acc_at"].is_object() || j["acc_at"].empty())
      throw std::runtime_error(a.report_path + ": report has no acc_at table");
    for (const auto& [k, v] : j["acc_at"].items())
      report.acc_at[std::stod(k)] = v.get<double>();
    write_text(out / "threshold_curve.csv", plots::threshold_curve_csv(report));
    write_text(out / "threshold_curve.svg", plots::threshold_curve_svg(report));
    std::printf("wrote %s and %s\n", (out / "threshold_curve.csv").c_str(),
                (out / "threshold_curve.svg").c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage weakly supervised phrase grounding"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* g = app.add_subcommand("gen", "generate a synthetic grounding corpus");
  g->add_option("--out", gen.out_dir, "output directory")->required();
  g->add_option("--seed", gen.seed, "generator seed");
  g->add_option("--num-train", gen.sc.num_train, "training instances");
  g->add_option("--num-val", gen.sc.num_val, "validation instances");
  g->add_option("--num-test", gen.sc.num_test, "test instances");
  g->add_option("--proposals", gen.sc.M, "proposals per image");
  g->add_option("--dim", gen.sc.d, "feature dimension (>= 8)");
  g->add_option("--concepts", gen.sc.num_concepts, "number of latent concepts");
  g->add_option("--rho", gen.sc.rho, "distractor fraction in [0,1]");
  g->add_flag("--jitter", gen.sc.jitter, "replace exact gt proposals with jittered copies");
  g->add_option("--content-degrade", gen.sc.content_degrade,
                "appearance falloff with crop misalignment, in [0,1]");
  g->add_option("--min-freq", gen.sc.min_freq, "relation vocabulary frequency threshold");

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "train a model");
  t->add_option("--config", train.config_path, "run configuration file")->required();
  t->add_option("--out", train.out_dir, "output directory");
  t->add_option("--resume", train.resume, "checkpoint to resume from");
  t->add_option("--set", train.sets, "key=value config override (repeatable)");
  t->add_option("--stop", train.stop, "pause after this iteration (resume to finish the plan)");
  CLI::Option* t_seed = t->add_option("--seed", train.seed, "seed override");

  EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "evaluate a checkpoint");
  e->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required();
  e->add_option("--corpus", eval.corpus_path, "corpus to evaluate (default: config's val)");
  e->add_option("--out", eval.out_path, "write the JSON report here");
  e->add_option("--rel-ks", eval.rel_ks, "top-k list for relation accuracy")->delimiter(',');

  InferArgs infer;
  CLI::App* i = app.add_subcommand("infer", "ground phrases with a checkpoint");
  i->add_option("--checkpoint", infer.checkpoint, "checkpoint file")->required();
  i->add_option("--corpus", infer.corpus_path, "corpus to ground")->required();
  i->add_option("--out", infer.out_path, "write JSONL predictions here (default stdout)");

  AblateArgs ablate;
  CLI::App* b = app.add_subcommand("ablate", "run the ablation table");
  b->add_option("--config", ablate.config_path, "base run configuration");
  b->add_option("--out", ablate.out_dir, "output directory");
  b->add_option("--seeds", ablate.seeds, "seed list")->delimiter(',');
  b->add_option("--variants", ablate.variant_names, "variant subset")->delimiter(',');
  b->add_option("--set", ablate.sets, "key=value config override (repeatable)");
  b->add_option("--rho", ablate.rho, "distractor fraction for generated corpora");
  b->add_option("--gen-train", ablate.gen_train, "generated training instances");
  b->add_option("--gen-val", ablate.gen_val, "generated validation instances");

  PlotArgs plot;
  CLI::App* p = app.add_subcommand("plot", "emit CSV + SVG charts");
  p->add_option("--log", plot.log_path, "metric log from training");
  p->add_option("--report", plot.report_path, "JSON report from eval");
  p->add_option("--out", plot.out_dir, "output directory");

  try {
    app.parse(argc, argv);
    train.seed_given = t_seed->count() > 0;
    if (g->parsed()) return run_gen(gen);
    if (t->parsed()) return run_train(train);
    if (e->parsed()) return run_eval(eval);
    if (i->parsed()) return run_infer(infer);
    if (b->parsed()) return run_ablate(ablate);
    if (p->parsed()) return run_plot(plot);
    return 1;
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}
