#include "wsg/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace wsg::ckpt {

namespace {

void put_bytes(std::string& out, const void* p, size_t n) {
  out.append(static_cast<const char*>(p), n);
}
void put_u32(std::string& out, std::uint32_t v) { put_bytes(out, &v, 4); }
void put_u64(std::string& out, std::uint64_t v) { put_bytes(out, &v, 8); }
void put_i32(std::string& out, std::int32_t v) { put_bytes(out, &v, 4); }
void put_f64s(std::string& out, const std::vector<double>& v) {
  put_bytes(out, v.data(), v.size() * sizeof(double));
}

// Cursor over the loaded file with hard bounds checks.
struct Reader {
  const std::string& buf;
  size_t pos = 0;
  std::string path;

  void need(size_t n) {
    if (pos + n > buf.size())
      throw std::runtime_error(path + ": checkpoint truncated (needed " + std::to_string(n) +
                               " bytes at offset " + std::to_string(pos) + ")");
  }
  void raw(void* p, size_t n) {
    need(n);
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
  std::int32_t i32() { std::int32_t v; raw(&v, 4); return v; }
  std::string str() {
    std::uint64_t n = u64();
    if (n > buf.size()) throw std::runtime_error(path + ": checkpoint corrupt (absurd string length)");
    need(size_t(n));
    std::string s(buf.data() + pos, size_t(n));
    pos += size_t(n);
    return s;
  }
  void f64s(std::vector<double>& v) { raw(v.data(), v.size() * sizeof(double)); }
};

}  // namespace

void save_checkpoint(const std::string& path, const model::Model& m, std::uint64_t iteration) {
  std::string out;
  put_bytes(out, kMagic, sizeof kMagic);
  put_u32(out, kFormatVersion);
  put_u64(out, iteration);
  std::string cfg_text = serialize_config(m.cfg);
  put_u64(out, cfg_text.size());
  out += cfg_text;
  put_u64(out, m.params.items().size());
  for (const auto& p : m.params.items()) {
    put_u64(out, p->name.size());
    out += p->name;
    put_i32(out, p->value.rows);
    put_i32(out, p->value.cols);
    put_f64s(out, p->value.a);
    put_f64s(out, p->velocity.a);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(path + ": cannot open checkpoint for writing");
  f.write(out.data(), std::streamsize(out.size()));
  if (!f) throw std::runtime_error(path + ": short write while saving checkpoint");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open checkpoint");
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Reader r{buf, 0, path};
  char magic[sizeof kMagic];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error(path + ": not a checkpoint file (bad magic)");
  std::uint32_t version = r.u32();
  if (version != kFormatVersion)
    throw std::runtime_error(path + ": checkpoint format version " + std::to_string(version) +
                             " unsupported (this build reads version " +
                             std::to_string(kFormatVersion) + ")");

  LoadedCheckpoint out;
  out.iteration = r.u64();
  out.config_text = r.str();
  RunConfig cfg;
  try {
    cfg = parse_config(out.config_text);
    validate_config(cfg);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": embedded config rejected: " + e.what());
  }

  out.model = model::init_model(cfg, cfg.seed);
  std::uint64_t count = r.u64();
  if (count != out.model.params.items().size())
    throw std::runtime_error(path + ": checkpoint holds " + std::to_string(count) +
                             " parameters but the config implies " +
                             std::to_string(out.model.params.items().size()));
  for (auto& p : out.model.params.items()) {
    std::string name = r.str();
    std::int32_t rows = r.i32();
    std::int32_t cols = r.i32();
    if (name != p->name || rows != p->value.rows || cols != p->value.cols)
      throw std::runtime_error(path + ": parameter mismatch: stored " + name + " (" +
                               std::to_string(rows) + "x" + std::to_string(cols) +
                               "), expected " + p->name + " (" + std::to_string(p->value.rows) +
                               "x" + std::to_string(p->value.cols) + ")");
    r.f64s(p->value.a);
    r.f64s(p->velocity.a);
  }
  if (r.pos != buf.size())
    throw std::runtime_error(path + ": trailing bytes after checkpoint payload");
  return out;
}

std::string snapshot_override_warning(const RunConfig& snapshot, const RunConfig& file_config) {
  std::string a = serialize_config(snapshot);
  std::string b = serialize_config(file_config);
  if (a == b) return "";
  // Locate the first differing line for the message.
  size_t ai = 0, bi = 0;
  while (ai < a.size() && bi < b.size()) {
    size_t ae = a.find('\n', ai);
    size_t be = b.find('\n', bi);
    std::string la = a.substr(ai, ae == std::string::npos ? std::string::npos : ae - ai);
    std::string lb = b.substr(bi, be == std::string::npos ? std::string::npos : be - bi);
    if (la != lb)
      return "warning: checkpoint config snapshot overrides the config file (snapshot '" + la +
             "' vs file '" + lb + "')";
    if (ae == std::string::npos || be == std::string::npos) break;
    ai = ae + 1;
    bi = be + 1;
  }
  return "warning: checkpoint config snapshot overrides the config file";
}

std::uint64_t param_hash(const model::Model& m) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const void* p, size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : m.params.items()) {
    mix(p->name.data(), p->name.size());
    mix(&p->value.rows, sizeof p->value.rows);
    mix(&p->value.cols, sizeof p->value.cols);
    mix(p->value.a.data(), p->value.a.size() * sizeof(double));
    mix(p->velocity.a.data(), p->velocity.a.size() * sizeof(double));
  }
  return h;
}

}  // namespace wsg::ckpt
