#include "wsg/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace wsg {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest round-trip formatting so that serialize -> parse -> serialize
// is stable byte for byte (config text is embedded in checkpoints).
std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad numeric value '" + s + "' for key '" + key + "'");
  }
}

long long parse_int(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer value '" + s + "' for key '" + key + "'");
  }
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::runtime_error("config: bad boolean value '" + s + "' for key '" + key + "'");
}

struct Field {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<Field>& fields() {
  auto intf = [](const char* name, int RunConfig::* p) {
    return Field{name, [p](const RunConfig& c) { return std::to_string(c.*p); },
                 [p, name](RunConfig& c, const std::string& v) { c.*p = int(parse_int(v, name)); }};
  };
  auto dblf = [](const char* name, double RunConfig::* p) {
    return Field{name, [p](const RunConfig& c) { return fmt(c.*p); },
                 [p, name](RunConfig& c, const std::string& v) { c.*p = parse_double(v, name); }};
  };
  auto boolf = [](const char* name, bool RunConfig::* p) {
    return Field{name, [p](const RunConfig& c) { return std::string(c.*p ? "true" : "false"); },
                 [p, name](RunConfig& c, const std::string& v) { c.*p = parse_bool(v, name); }};
  };
  auto strf = [](const char* name, std::string RunConfig::* p) {
    return Field{name, [p](const RunConfig& c) { return c.*p; },
                 [p](RunConfig& c, const std::string& v) { c.*p = v; }};
  };
  static const std::vector<Field> table = {
      intf("M", &RunConfig::M),
      intf("K", &RunConfig::K),
      intf("d", &RunConfig::d),
      intf("C_r", &RunConfig::C_r),
      intf("vocab_size", &RunConfig::vocab_size),
      intf("num_categories", &RunConfig::num_categories),
      intf("d_w", &RunConfig::d_w),
      intf("d_e", &RunConfig::d_e),
      intf("mlp_hidden", &RunConfig::mlp_hidden),
      dblf("tau", &RunConfig::tau),
      dblf("lambda1", &RunConfig::lambda1),
      dblf("lambda2", &RunConfig::lambda2),
      dblf("lambda3", &RunConfig::lambda3),
      dblf("delta", &RunConfig::delta),
      dblf("lr0", &RunConfig::lr0),
      dblf("weight_decay", &RunConfig::weight_decay),
      dblf("momentum", &RunConfig::momentum),
      dblf("grad_clip", &RunConfig::grad_clip),
      intf("batch_size", &RunConfig::batch_size),
      Field{"total_iters",
            [](const RunConfig& c) { return std::to_string(c.total_iters); },
            [](RunConfig& c, const std::string& v) { c.total_iters = parse_int(v, "total_iters"); }},
      Field{"lr_milestones",
            [](const RunConfig& c) {
              std::string out;
              for (size_t i = 0; i < c.lr_milestones.size(); ++i) {
                if (i) out += ',';
                out += fmt(c.lr_milestones[i]);
              }
              return out;
            },
            [](RunConfig& c, const std::string& v) {
              c.lr_milestones.clear();
              if (trim(v).empty()) return;
              std::stringstream ss(v);
              std::string part;
              while (std::getline(ss, part, ','))
                c.lr_milestones.push_back(parse_double(trim(part), "lr_milestones"));
            }},
      dblf("reg_warmup_fraction", &RunConfig::reg_warmup_fraction),
      Field{"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
            [](RunConfig& c, const std::string& v) {
              c.seed = uint64_t(parse_int(v, "seed"));
            }},
      strf("train_corpus", &RunConfig::train_corpus),
      strf("val_corpus", &RunConfig::val_corpus),
      strf("relation_vocab", &RunConfig::relation_vocab),
      boolf("use_semantic_fusion", &RunConfig::use_semantic_fusion),
      boolf("use_topk", &RunConfig::use_topk),
      boolf("use_regression", &RunConfig::use_regression),
      boolf("use_graph_and_relation", &RunConfig::use_graph_and_relation),
      boolf("use_rank", &RunConfig::use_rank),
      boolf("use_rec", &RunConfig::use_rec),
      intf("log_every", &RunConfig::log_every),
      intf("val_every", &RunConfig::val_every),
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const Field& f : fields())
    if (key == f.name) return &f;
  return nullptr;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected 'key = value', line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const Field* f = find_field(key);
    if (!f)
      throw std::runtime_error("config: unknown key '" + key + "', line " + std::to_string(lineno));
    f->set(cfg, value);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) {
    out += f.name;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

void save_config(const std::string& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << serialize_config(config);
  if (!out) throw std::runtime_error(path + ": write failed");
}

void apply_override(RunConfig& config, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("config override must look like key=value: '" + assignment + "'");
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  const Field* f = find_field(key);
  if (!f) throw std::runtime_error("config override: unknown key '" + key + "'");
  f->set(config, value);
}

void validate_config(const RunConfig& c) {
  auto bad = [](const std::string& why) { throw std::runtime_error("config: " + why); };
  if (c.M < 1) bad("M must be positive");
  if (c.K < 1 || c.K > c.M) bad("K must satisfy 1 <= K <= M");
  if (c.d < 1) bad("d must be positive");
  if (c.C_r < 0) bad("C_r must be non-negative");
  if (c.vocab_size < 1) bad("vocab_size must be positive");
  if (c.num_categories < 1) bad("num_categories must be positive");
  if (c.d_w < 1 || c.d_e < 1 || c.mlp_hidden < 1) bad("embedding/hidden dims must be positive");
  if (!(c.tau > 0.0 && c.tau < 1.0)) bad("tau must lie in (0,1)");
  if (c.lambda1 < 0.0 || c.lambda2 < 0.0 || c.lambda3 < 0.0) bad("lambda weights must be >= 0");
  if (c.delta < 0.0) bad("delta must be >= 0");
  if (c.lr0 <= 0.0) bad("lr0 must be positive");
  if (c.weight_decay < 0.0) bad("weight_decay must be >= 0");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) bad("momentum must lie in [0,1)");
  if (c.batch_size < 1) bad("batch_size must be positive");
  if (c.total_iters < 1) bad("total_iters must be positive");
  double prev = 0.0;
  for (double m : c.lr_milestones) {
    if (!(m > 0.0 && m < 1.0)) bad("lr_milestones must lie in (0,1)");
    if (m <= prev && prev != 0.0) bad("lr_milestones must be strictly ascending");
    prev = m;
  }
  if (!(c.reg_warmup_fraction >= 0.0 && c.reg_warmup_fraction <= 1.0))
    bad("reg_warmup_fraction must lie in [0,1]");
  if (c.log_every < 1 || c.val_every < 1) bad("log/val cadence must be positive");
}

}  // namespace wsg
