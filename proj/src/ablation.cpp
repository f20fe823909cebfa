#include "wsg/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "wsg/checkpoint.hpp"
#include "wsg/numfmt.hpp"
#include "wsg/trainer.hpp"

namespace wsg::ablation {

std::vector<Variant> default_variants() {
  const std::vector<std::string> plain = {"use_topk=false", "use_regression=false",
                                          "use_graph_and_relation=false"};
  auto with = [](std::vector<std::string> base, std::initializer_list<const char*> extra) {
    for (const char* e : extra) base.push_back(e);
    return base;
  };
  return {
      {"rec_only", with(plain, {"use_rank=false", "use_rec=true"})},
      {"rank_only", with(plain, {"use_rank=true", "use_rec=false"})},
      {"baseline", with(plain, {"use_rank=true", "use_rec=true"})},
      {"tsd", {"use_topk=true", "use_regression=false", "use_graph_and_relation=false"}},
      {"tsd_str", {"use_topk=true", "use_regression=true", "use_graph_and_relation=false"}},
      {"full", {"use_topk=true", "use_regression=true", "use_graph_and_relation=true"}},
  };
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const std::vector<Variant>& variants,
                                      const std::vector<std::uint64_t>& seeds,
                                      const CorpusProvider& provider, bool echo) {
  // One corpus pair per seed, shared by every variant.
  std::map<std::uint64_t, std::pair<corpus::Corpus, corpus::Corpus>> data;
  for (std::uint64_t s : seeds) {
    auto& [train, val] = data[s];
    provider(s, train, val);
  }

  std::vector<AblationRow> rows;
  for (const Variant& v : variants) {
    AblationRow row;
    row.name = v.name;
    for (std::uint64_t seed : seeds) {
      try {
        RunConfig cfg = base;
        for (const std::string& o : v.overrides) apply_override(cfg, o);
        cfg.seed = seed;
        validate_config(cfg);

        model::Model m = model::init_model(cfg, seed);
        row.fresh_hashes.push_back(ckpt::param_hash(m));
        const auto& [train, val] = data.at(seed);
        trainer::TrainOutcome out = trainer::run_training(m, train, val, 0, cfg.total_iters);
        double acc = std::isnan(out.final_val_acc) ? trainer::validation_accuracy(m, val)
                                                   : out.final_val_acc;
        row.accs.push_back(acc);
        if (echo)
          std::fprintf(stderr, "[ablate] %s seed=%llu acc=%.4f\n", v.name.c_str(),
                       (unsigned long long)seed, acc);
      } catch (const std::exception& e) {
        row.failed = true;
        if (row.error.empty()) row.error = e.what();
        if (echo)
          std::fprintf(stderr, "[ablate] %s seed=%llu FAILED: %s\n", v.name.c_str(),
                       (unsigned long long)seed, e.what());
      }
    }
    if (!row.accs.empty()) {
      double sum = 0.0;
      for (double a : row.accs) sum += a;
      row.mean = sum / double(row.accs.size());
      if (row.accs.size() > 1) {
        double ss = 0.0;
        for (double a : row.accs) ss += (a - row.mean) * (a - row.mean);
        row.spread = std::sqrt(ss / double(row.accs.size() - 1));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_table(const std::vector<AblationRow>& rows,
                         const std::vector<std::uint64_t>& seeds) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s", "variant", "mean", "spread");
  out += buf;
  for (std::uint64_t s : seeds) {
    std::snprintf(buf, sizeof buf, "  seed_%llu", (unsigned long long)s);
    out += buf;
  }
  out += "\n";
  for (const AblationRow& r : rows) {
    if (r.failed && r.accs.empty()) {
      std::snprintf(buf, sizeof buf, "%-10s FAILED: %s\n", r.name.c_str(), r.error.c_str());
      out += buf;
      continue;
    }
    std::snprintf(buf, sizeof buf, "%-10s %8.4f %8.4f", r.name.c_str(), r.mean, r.spread);
    out += buf;
    for (double a : r.accs) {
      std::snprintf(buf, sizeof buf, "  %7.4f", a);
      out += buf;
    }
    if (r.failed) out += "  (some seeds failed: " + r.error + ")";
    out += "\n";
  }
  return out;
}

std::string table_to_csv(const std::vector<AblationRow>& rows,
                         const std::vector<std::uint64_t>& seeds) {
  std::string out = "variant,mean,spread";
  for (std::uint64_t s : seeds) out += ",seed_" + std::to_string(s);
  out += ",failed\n";
  for (const AblationRow& r : rows) {
    out += r.name + "," + format_double(r.mean) + "," + format_double(r.spread);
    for (size_t i = 0; i < seeds.size(); ++i)
      out += "," + (i < r.accs.size() ? format_double(r.accs[i]) : std::string(""));
    out += std::string(",") + (r.failed ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace wsg::ablation
