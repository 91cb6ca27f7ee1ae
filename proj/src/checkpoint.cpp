#include "cyclebal/core/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>

namespace cyclebal {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts unsupported");

size_t dtypeSize(Checkpoint::DType t) {
  switch (t) {
    case Checkpoint::DType::F32: return 4;
    default: return 8;
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void writeRaw(std::FILE* f, const void* p, size_t n) {
  if (std::fwrite(p, 1, n, f) != n) throw CheckpointError("checkpoint: short write");
}

void readRaw(std::FILE* f, void* p, size_t n, const char* what) {
  if (std::fread(p, 1, n, f) != n)
    throw CheckpointError(std::string("checkpoint: truncated file while reading ") + what);
}

template <typename T>
void writePod(std::FILE* f, T v) {
  writeRaw(f, &v, sizeof(v));
}

template <typename T>
T readPod(std::FILE* f, const char* what) {
  T v{};
  readRaw(f, &v, sizeof(v), what);
  return v;
}

}  // namespace

Eigen::Index Checkpoint::Entry::elementCount() const {
  Eigen::Index n = 1;
  for (auto d : dims) n *= d;
  return dims.empty() ? (bytes.empty() ? 0 : 1) : n;
}

const Checkpoint::Entry& Checkpoint::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw CheckpointError("checkpoint: missing entry '" + name + "'");
  return it->second;
}

std::vector<std::string> Checkpoint::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

namespace {
template <typename Scalar>
Checkpoint::Entry makeTensorEntry(Checkpoint::DType dt, const Tensor<Scalar>& t) {
  Checkpoint::Entry e;
  e.dtype = dt;
  e.dims = t.shape();
  e.bytes.resize(static_cast<size_t>(t.size()) * sizeof(Scalar));
  std::memcpy(e.bytes.data(), t.data(), e.bytes.size());
  return e;
}
}  // namespace

void Checkpoint::add(const std::string& name, const Tensor<float>& t) {
  entries_[name] = makeTensorEntry(DType::F32, t);
}

void Checkpoint::add(const std::string& name, const Tensor<double>& t) {
  entries_[name] = makeTensorEntry(DType::F64, t);
}

void Checkpoint::addU64(const std::string& name, uint64_t value) {
  addU64Array(name, {value});
}

void Checkpoint::addU64Array(const std::string& name, const std::vector<uint64_t>& values) {
  Entry e;
  e.dtype = DType::U64;
  e.dims = {static_cast<Eigen::Index>(values.size())};
  e.bytes.resize(values.size() * 8);
  std::memcpy(e.bytes.data(), values.data(), e.bytes.size());
  entries_[name] = e;
}

void Checkpoint::addI64(const std::string& name, int64_t value) {
  Entry e;
  e.dtype = DType::I64;
  e.dims = {1};
  e.bytes.resize(8);
  std::memcpy(e.bytes.data(), &value, 8);
  entries_[name] = e;
}

void Checkpoint::addF64(const std::string& name, double value) {
  Entry e;
  e.dtype = DType::F64;
  e.dims = {1};
  e.bytes.resize(8);
  std::memcpy(e.bytes.data(), &value, 8);
  entries_[name] = e;
}

namespace {
template <typename Scalar>
Tensor<Scalar> entryToTensor(const Checkpoint::Entry& e, Checkpoint::DType want,
                             const std::string& name) {
  if (e.dtype != want)
    throw CheckpointError("checkpoint: entry '" + name + "' has unexpected dtype");
  Tensor<Scalar> t(e.dims);
  if (e.bytes.size() != static_cast<size_t>(t.size()) * sizeof(Scalar))
    throw CheckpointError("checkpoint: entry '" + name + "' has inconsistent byte count");
  std::memcpy(t.data(), e.bytes.data(), e.bytes.size());
  return t;
}
}  // namespace

Tensor<float> Checkpoint::tensorF32(const std::string& name) const {
  return entryToTensor<float>(at(name), DType::F32, name);
}

Tensor<double> Checkpoint::tensorF64(const std::string& name) const {
  return entryToTensor<double>(at(name), DType::F64, name);
}

uint64_t Checkpoint::u64(const std::string& name) const {
  auto v = u64Array(name);
  if (v.size() != 1)
    throw CheckpointError("checkpoint: entry '" + name + "' is not a scalar");
  return v[0];
}

std::vector<uint64_t> Checkpoint::u64Array(const std::string& name) const {
  const Entry& e = at(name);
  if (e.dtype != DType::U64)
    throw CheckpointError("checkpoint: entry '" + name + "' is not u64");
  std::vector<uint64_t> out(e.bytes.size() / 8);
  std::memcpy(out.data(), e.bytes.data(), e.bytes.size());
  return out;
}

int64_t Checkpoint::i64(const std::string& name) const {
  const Entry& e = at(name);
  if (e.dtype != DType::I64 || e.bytes.size() != 8)
    throw CheckpointError("checkpoint: entry '" + name + "' is not a scalar i64");
  int64_t v = 0;
  std::memcpy(&v, e.bytes.data(), 8);
  return v;
}

double Checkpoint::f64(const std::string& name) const {
  const Entry& e = at(name);
  if (e.dtype != DType::F64 || e.bytes.size() != 8)
    throw CheckpointError("checkpoint: entry '" + name + "' is not a scalar f64");
  double v = 0;
  std::memcpy(&v, e.bytes.data(), 8);
  return v;
}

void Checkpoint::save(const std::string& path) const {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw CheckpointError("checkpoint: cannot open '" + path + "' for writing");
  writeRaw(f.get(), kMagic, 8);
  writePod<uint32_t>(f.get(), kVersion);
  writePod<uint64_t>(f.get(), entries_.size());
  for (const auto& [name, e] : entries_) {
    writePod<uint32_t>(f.get(), static_cast<uint32_t>(name.size()));
    writeRaw(f.get(), name.data(), name.size());
    writePod<uint8_t>(f.get(), static_cast<uint8_t>(e.dtype));
    writePod<uint32_t>(f.get(), static_cast<uint32_t>(e.dims.size()));
    for (auto d : e.dims) writePod<uint64_t>(f.get(), static_cast<uint64_t>(d));
    writeRaw(f.get(), e.bytes.data(), e.bytes.size());
  }
  if (std::fflush(f.get()) != 0) throw CheckpointError("checkpoint: flush failed");
}

Checkpoint Checkpoint::load(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw CheckpointError("checkpoint: cannot open '" + path + "'");
  char magic[8];
  readRaw(f.get(), magic, 8, "magic");
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw CheckpointError("checkpoint: bad magic in '" + path +
                          "' (expected CBALCKPT, format version " +
                          std::to_string(kVersion) + ")");
  const auto version = readPod<uint32_t>(f.get(), "version");
  if (version != kVersion)
    throw CheckpointError("checkpoint: unsupported format version " +
                          std::to_string(version) + " in '" + path + "' (expected " +
                          std::to_string(kVersion) + ")");
  const auto count = readPod<uint64_t>(f.get(), "entry count");
  Checkpoint ck;
  for (uint64_t i = 0; i < count; ++i) {
    const auto nameLen = readPod<uint32_t>(f.get(), "entry name length");
    std::string name(nameLen, '\0');
    readRaw(f.get(), name.data(), nameLen, "entry name");
    Entry e;
    const auto dt = readPod<uint8_t>(f.get(), "dtype");
    if (dt > 3) throw CheckpointError("checkpoint: invalid dtype in entry '" + name + "'");
    e.dtype = static_cast<DType>(dt);
    const auto rank = readPod<uint32_t>(f.get(), "rank");
    Eigen::Index total = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      const auto dim = readPod<uint64_t>(f.get(), "dims");
      e.dims.push_back(static_cast<Eigen::Index>(dim));
      total *= static_cast<Eigen::Index>(dim);
    }
    if (rank == 0) total = 1;
    e.bytes.resize(static_cast<size_t>(total) * dtypeSize(e.dtype));
    readRaw(f.get(), e.bytes.data(), e.bytes.size(), name.c_str());
    ck.entries_[name] = std::move(e);
  }
  return ck;
}

}  // namespace cyclebal
