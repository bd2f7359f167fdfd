#include "rex/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rex {

namespace {

constexpr char kMagic[8] = {'R', 'E', 'X', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  write_u64(os, bits);
}

double read_f64(std::istream& is) {
  std::uint64_t bits = read_u64(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void write_f32(std::ostream& os, double d) {
  float f = static_cast<float>(d);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 4);
}

double read_f32(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  float f;
  std::memcpy(&f, &bits, 4);
  return static_cast<double>(f);
}

}  // namespace

std::string to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

Precision precision_from_string(const std::string& s) {
  if (s == "f32") return Precision::F32;
  if (s == "f64") return Precision::F64;
  throw std::invalid_argument("unknown precision tag '" + s +
                              "' (expected f32 or f64)");
}

void save_checkpoint(const ParameterStore& params, const std::string& path,
                     Precision precision) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for write: " + path);
  os.write(kMagic, 8);
  os.put(precision == Precision::F32 ? '\0' : '\1');
  auto all = params.all();
  write_u64(os, all.size());
  for (const Parameter* p : all) {
    write_u64(os, p->name.size());
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u64(os, p->value.rows());
    write_u64(os, p->value.cols());
    for (double d : p->value.data())
      precision == Precision::F32 ? write_f32(os, d) : write_f64(os, d);
  }
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

void load_checkpoint(ParameterStore& params, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  int tag = is.get();
  if (tag != 0 && tag != 1)
    throw std::runtime_error("checkpoint has unknown precision tag");
  Precision precision = tag == 0 ? Precision::F32 : Precision::F64;
  std::uint64_t count = read_u64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t len = read_u64(is);
    std::string name(len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(len));
    std::uint64_t rows = read_u64(is);
    std::uint64_t cols = read_u64(is);
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    if (!params.contains(name))
      throw std::runtime_error("checkpoint parameter '" + name +
                               "' not present in model");
    Parameter& p = params.get(name);
    if (p.value.rows() != rows || p.value.cols() != cols)
      throw std::runtime_error(
          "checkpoint parameter '" + name + "' shape " +
          Tensor::shape_str(rows, cols) + " does not match model shape " +
          p.value.shape_str());
    for (std::uint64_t k = 0; k < rows * cols; ++k)
      p.value[k] = precision == Precision::F32 ? read_f32(is) : read_f64(is);
  }
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
}

}  // namespace rex
