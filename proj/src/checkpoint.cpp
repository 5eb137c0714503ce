#include "scriptqa/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace scriptqa {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

std::string read_string(std::istream& in) {
  std::uint64_t n = read_u64(in);
  if (n > (1ull << 32)) throw std::runtime_error("checkpoint: bad string size");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

void check_magic(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version");
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& meta_json,
                     const std::vector<Parameter*>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_string(out, meta_json);
  write_u64(out, params.size());
  for (const Parameter* p : params) {
    write_string(out, p->name);
    write_u64(out, static_cast<std::uint64_t>(p->v.rows()));
    write_u64(out, static_cast<std::uint64_t>(p->v.cols()));
    out.write(reinterpret_cast<const char*>(p->v.data()),
              static_cast<std::streamsize>(sizeof(double) * p->v.size()));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::string load_checkpoint(const std::string& path,
                            const std::vector<Parameter*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  check_magic(in);
  std::string meta = read_string(in);
  std::uint64_t count = read_u64(in);

  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : params) by_name[p->name] = p;
  std::map<std::string, bool> seen;
  for (std::uint64_t k = 0; k < count; ++k) {
    std::string name = read_string(in);
    auto rows = static_cast<Eigen::Index>(read_u64(in));
    auto cols = static_cast<Eigen::Index>(read_u64(in));
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw std::runtime_error("checkpoint: unexpected tensor " + name);
    Parameter* p = it->second;
    if (p->v.rows() != rows || p->v.cols() != cols)
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    in.read(reinterpret_cast<char*>(p->v.data()),
            static_cast<std::streamsize>(sizeof(double) * p->v.size()));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor " + name);
    seen[name] = true;
  }
  for (const Parameter* p : params) {
    if (!seen.count(p->name))
      throw std::runtime_error("checkpoint: missing tensor " + p->name);
  }
  return meta;
}

std::string read_checkpoint_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  check_magic(in);
  return read_string(in);
}

}  // namespace scriptqa
