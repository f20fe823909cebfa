#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wsg/config.hpp"
#include "wsg/corpus.hpp"

namespace wsg::ablation {

// One table row: a named set of config overrides applied on top of the
// base run configuration.
struct Variant {
  std::string name;
  std::vector<std::string> overrides; // "key=value" assignments
};

// The standard row set. Architecture rows stack the components in the
// order the components were introduced (candidate denoising, then
// self-taught regression, then the object graph with its relation
// loss); the two loss-only rows isolate each matching loss on the
// plainest architecture.
//   rec_only  - reconstruction loss alone
//   rank_only - ranking loss alone
//   baseline  - both matching losses, no denoising/regression/graph
//   tsd       - baseline + top-K candidate denoising
//   tsd_str   - tsd + self-taught box regression
//   full      - everything on
std::vector<Variant> default_variants();

struct AblationRow {
  std::string name;
  std::vector<double> accs;                 // final val accuracy per seed
  double mean = 0.0;
  double spread = 0.0;                      // sample std dev; 0 for one seed
  bool failed = false;
  std::string error;                        // first failure message
  std::vector<std::uint64_t> fresh_hashes;  // initial param hash per seed
};

// Supplies the (train, val) corpora for one seed. Called once per
// seed; every variant trains on the same data so rows are comparable.
using CorpusProvider =
    std::function<void(std::uint64_t seed, corpus::Corpus& train, corpus::Corpus& val)>;

// Trains every variant for every seed and aggregates a comparison
// table. Each (variant, seed) run constructs its model from scratch
// inside the loop — nothing persists between runs except the row being
// assembled, and the recorded fresh-parameter hashes make that
// checkable. A variant whose training aborts is marked failed; the
// remaining rows still run.
std::vector<AblationRow> run_ablation(const RunConfig& base, const std::vector<Variant>& variants,
                                      const std::vector<std::uint64_t>& seeds,
                                      const CorpusProvider& provider, bool echo = false);

// Fixed-width text table / CSV of the aggregated rows.
std::string format_table(const std::vector<AblationRow>& rows,
                         const std::vector<std::uint64_t>& seeds);
std::string table_to_csv(const std::vector<AblationRow>& rows,
                         const std::vector<std::uint64_t>& seeds);

}  // namespace wsg::ablation
