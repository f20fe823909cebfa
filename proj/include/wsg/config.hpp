#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wsg {

// Full run configuration. Serialized as flat "key = value" lines under
// the exact field names below; lr_milestones is a comma-separated list
// of fractions of total_iters.
struct RunConfig {
  // Model shape.
  int M = 20;              // proposals per image
  int K = 5;               // survivors of top-K denoising
  int d = 32;              // proposal feature / hidden dimension
  int C_r = 4;             // relation classes (label 0 = none, excluded)
  int vocab_size = 40;     // word-id universe V
  int num_categories = 12; // categories/concepts C (table has C+1 rows)
  int d_w = 32;            // word embedding dimension
  int d_e = 16;            // category/concept embedding dimension
  int mlp_hidden = 64;     // hidden width of the perceptron heads

  // Loss shape.
  double tau = 0.6;     // IoU gate for self-taught regression targets
  double lambda1 = 0.1; // regression weight
  double lambda2 = 1.0; // relation weight
  double lambda3 = 1.0; // ranking weight
  double delta = 0.1;   // ranking margin

  // Optimizer.
  double lr0 = 1e-3;
  double weight_decay = 5e-4;
  double momentum = 0.9;
  double grad_clip = 10.0; // global-norm ceiling; <= 0 disables
  int batch_size = 16;
  long long total_iters = 2000;
  std::vector<double> lr_milestones{0.4, 0.5}; // x0.1 at each fraction
  double reg_warmup_fraction = 0.09375;        // l_reg off until here
  uint64_t seed = 1;

  // Data.
  std::string train_corpus;
  std::string val_corpus;
  std::string relation_vocab;

  // Ablation switches.
  bool use_semantic_fusion = true;    // s^a fusion in both stages
  bool use_topk = true;               // top-K denoising (off -> K = M)
  bool use_regression = true;         // offsets at inference + l_reg
  bool use_graph_and_relation = true; // message passing + l_rel
  bool use_rank = true;
  bool use_rec = true;

  // Logging cadence.
  int log_every = 50;
  int val_every = 500;

  // Number of candidates actually kept per phrase after the denoising
  // switch is applied.
  int effective_k() const { return use_topk ? K : M; }
};

// Parse "key = value" lines ('#' comments, blank lines allowed).
// Unknown keys and malformed values are errors naming the line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);
void save_config(const std::string& path, const RunConfig& config);

// Apply one "key=value" override (CLI flags beat file values).
void apply_override(RunConfig& config, const std::string& assignment);

// Enforce the structural invariants (positive dims, K <= M, milestones
// ascending in (0,1), tau in (0,1), ...). Throws on violation.
void validate_config(const RunConfig& config);

}  // namespace wsg
