#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace svr::core {

// Little binary writer/reader for checkpoints. Fixed-width little-endian
// fields; doubles are written bit-exact via their IEEE-754 representation.
class BinWriter {
public:
  explicit BinWriter(const std::string& path) : os_(path, std::ios::binary) {
    if (!os_) throw std::runtime_error("cannot open for writing: " + path);
  }
  void u32(uint32_t v) { raw(&v, sizeof v); }
  void u64(uint64_t v) { raw(&v, sizeof v); }
  void i64(int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
  void tensor(const Tensor& t) {
    u32(static_cast<uint32_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) u32(static_cast<uint32_t>(t.dim(i)));
    raw(t.data(), t.numel() * sizeof(double));
  }
  bool good() const { return os_.good(); }

private:
  void raw(const void* p, size_t n) { os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  std::ofstream os_;
};

class BinReader {
public:
  explicit BinReader(const std::string& path) : is_(path, std::ios::binary) {
    if (!is_) throw std::runtime_error("cannot open for reading: " + path);
  }
  uint32_t u32() { uint32_t v; raw(&v, sizeof v); return v; }
  uint64_t u64() { uint64_t v; raw(&v, sizeof v); return v; }
  int64_t i64() { int64_t v; raw(&v, sizeof v); return v; }
  double f64() { double v; raw(&v, sizeof v); return v; }
  std::string str() {
    size_t n = checked_count(u64(), 1);
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  std::vector<double> doubles() {
    size_t n = checked_count(u64(), sizeof(double));
    std::vector<double> v(n);
    raw(v.data(), n * sizeof(double));
    return v;
  }
  Tensor tensor() {
    uint32_t rank = u32();
    if (rank > 8) throw std::runtime_error("corrupt tensor header");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(u32());
    Tensor t(shape);
    raw(t.data(), t.numel() * sizeof(double));
    return t;
  }

private:
  size_t checked_count(uint64_t n, size_t elem) {
    if (n > (1ull << 32) / elem) throw std::runtime_error("corrupt length field");
    return static_cast<size_t>(n);
  }
  void raw(void* p, size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(is_.gcount()) != n) throw std::runtime_error("truncated file");
  }
  std::ifstream is_;
};

// FNV-1a over a byte string; used to fingerprint configurations.
inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace svr::core
